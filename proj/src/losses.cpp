#include "spen/losses.hpp"

#include <cmath>
#include <numeric>

#include "spen/histograms.hpp"
#include "internal/joint_accum.hpp"

namespace spen::losses {

namespace {

// Divergence value over normalized cells; fills g = d value / d q when
// requested. Cells with p = 0 contribute 0 to KL and cross-entropy.
double divergence_pass(const std::vector<double>& p, const std::vector<double>& q, LossKind kind,
                       double eps, std::vector<double>* g) {
    const std::size_t n = p.size();
    if (g) g->assign(n, 0.0);
    double value = 0.0;
    switch (kind) {
        case LossKind::kl:
            for (std::size_t c = 0; c < n; ++c) {
                if (p[c] > 0.0) {
                    value += p[c] * (std::log(p[c] + eps) - std::log(q[c] + eps));
                    if (g) (*g)[c] = -p[c] / (q[c] + eps);
                }
            }
            break;
        case LossKind::cross_entropy:
            for (std::size_t c = 0; c < n; ++c) {
                if (p[c] > 0.0) {
                    value -= p[c] * std::log(q[c] + eps);
                    if (g) (*g)[c] = -p[c] / (q[c] + eps);
                }
            }
            break;
        case LossKind::hellinger:
            for (std::size_t c = 0; c < n; ++c) {
                const double sp = std::sqrt(p[c]);
                const double sq = std::sqrt(q[c]);
                const double d = sp - sq;
                value += 0.5 * d * d;
                if (g) (*g)[c] = 0.5 * (1.0 - sp / std::sqrt(q[c] + eps));
            }
            break;
    }
    return value;
}

void normalize_in_place(std::vector<double>& raw, double& mass_out) {
    const double mass = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (!(mass > 0.0)) {
        throw DegeneratePmf("estimate carries no mass on the bin grid");
    }
    for (double& v : raw) v /= mass;
    mass_out = mass;
}

}  // namespace

LossReport evaluate(const ImageGrid& target, const ImageGrid& pred, const kde::KdeJointConfig& cfg,
                    LossKind kind, double eps, bool with_gradient) {
    validate_pair(target, pred);
    validate(cfg.kernel1);
    validate(cfg.kernel2);
    if (with_gradient && (cfg.kernel1.family == KernelFamily::box ||
                          cfg.kernel2.family == KernelFamily::box)) {
        throw NonDifferentiableKernel("gradients require differentiable kernels on both axes");
    }
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw InvalidRange("loss smoothing eps must be positive and finite");
    }

    const int height = pred.height(), width = pred.width(), channels = pred.channels();
    const ImageGrid target_tilde = hist::neighbor_mean(target, cfg.weights);
    const ImageGrid pred_tilde = hist::neighbor_mean(pred, cfg.weights);

    std::vector<detail::ChannelPlanes> target_planes, pred_planes;
    for (int k = 0; k < channels; ++k) {
        target_planes.push_back({target.channel_plane(k).data(),
                                 target_tilde.channel_plane(k).data(), height, width});
        pred_planes.push_back({pred.channel_plane(k).data(), pred_tilde.channel_plane(k).data(),
                               height, width});
    }

    std::vector<detail::WindowSpan> spans;
    if (cfg.window.has_value()) {
        spans = detail::enumerate_windows(height, width, *cfg.window);
    } else {
        spans.push_back(detail::global_span(height, width));
    }

    const int b = cfg.bins.bin_count();
    const double cmin = cfg.bins.centers().front();
    const double cmax = cfg.bins.centers().back();
    const double contribution = 1.0 / (static_cast<double>(spans.size()) * channels);

    std::vector<double> raw_p, raw_q, g, s;
    std::vector<double> k1_vals, k1_derivs, k2_vals, k2_derivs;
    std::vector<double> grad;
    if (with_gradient) grad.assign(pred.size(), 0.0);

    std::vector<std::pair<kde::WindowOrigin, double>> per_window;
    per_window.reserve(spans.size());

    for (const auto& span : spans) {
        double window_sum = 0.0;
        for (int ch = 0; ch < channels; ++ch) {
            detail::accumulate_joint(target_planes[ch], span, cfg, raw_p);
            detail::accumulate_joint(pred_planes[ch], span, cfg, raw_q);
            double mass_p = 0.0, mass_q = 0.0;
            normalize_in_place(raw_p, mass_p);
            normalize_in_place(raw_q, mass_q);

            window_sum += divergence_pass(raw_p, raw_q, kind, eps, with_gradient ? &g : nullptr);

            if (!with_gradient) continue;

            // d value / d raw_c = (g_c - sum g q) / Z: normalization couples
            // every cell, so the mean-field term has to come along.
            double gbar = 0.0;
            for (std::size_t c = 0; c < g.size(); ++c) gbar += g[c] * raw_q[c];
            s.resize(g.size());
            for (std::size_t c = 0; c < g.size(); ++c) s[c] = (g[c] - gbar) / mass_q;

            const auto& planes = pred_planes[ch];
            for (int i = 0; i < span.rows; ++i) {
                const int r = span.image_row(i, height);
                for (int j = 0; j < span.cols; ++j) {
                    const int c = span.image_col(j, width);
                    const std::size_t p = static_cast<std::size_t>(r) * width + c;
                    const double x = planes.values[p];
                    const double xt = planes.tilde[p];
                    const double u = cfg.bins.clamp_to_centers(x);
                    const double v = cfg.bins.clamp_to_centers(xt);
                    const int f1 =
                        detail::kernel_support_pair(cfg.kernel1, cfg.bins, u, k1_vals, k1_derivs);
                    const int f2 =
                        detail::kernel_support_pair(cfg.kernel2, cfg.bins, v, k2_vals, k2_derivs);

                    double du_sum = 0.0, dv_sum = 0.0;
                    for (std::size_t a = 0; a < k1_vals.size(); ++a) {
                        const double* srow =
                            s.data() + static_cast<std::size_t>(f1 + a) * b + f2;
                        const double ka = k1_vals[a];
                        const double da = k1_derivs[a];
                        double row_du = 0.0, row_dv = 0.0;
                        for (std::size_t bb = 0; bb < k2_vals.size(); ++bb) {
                            row_du += k2_vals[bb] * srow[bb];
                            row_dv += k2_derivs[bb] * srow[bb];
                        }
                        du_sum += da * row_du;
                        dv_sum += ka * row_dv;
                    }
                    const double du = du_sum / cfg.kernel1.bandwidth;
                    const double dv = dv_sum / cfg.kernel2.bandwidth;

                    // clamped values are flat in the loss, so no gradient
                    if (x >= cmin && x <= cmax) {
                        grad[pred.index(r, c, ch)] += contribution * du;
                    }
                    if (xt >= cmin && xt <= cmax) {
                        for (int dr = -1; dr <= 1; ++dr) {
                            for (int dc = -1; dc <= 1; ++dc) {
                                if (dr == 0 && dc == 0) continue;
                                const double w = cfg.weights.weight(dr, dc);
                                if (w == 0.0) continue;
                                const int nr = detail::reflect(r + dr, height);
                                const int nc = detail::reflect(c + dc, width);
                                grad[pred.index(nr, nc, ch)] += contribution * dv * w;
                            }
                        }
                    }
                }
            }
        }
        per_window.emplace_back(span.origin(), window_sum / channels);
    }

    LossReport report;
    double total = 0.0;
    for (const auto& [origin, v] : per_window) total += v;
    report.value = total / static_cast<double>(per_window.size());
    if (cfg.window.has_value()) {
        report.per_window = std::move(per_window);
    }
    if (with_gradient) {
        report.gradient = pred.with_data(std::move(grad));
    }
    return report;
}

LossReport spatial_kl(const ImageGrid& target, const ImageGrid& pred,
                      const kde::KdeJointConfig& cfg, double eps) {
    return evaluate(target, pred, cfg, LossKind::kl, eps, false);
}

LossReport spatial_kl_grad(const ImageGrid& target, const ImageGrid& pred,
                           const kde::KdeJointConfig& cfg, double eps) {
    return evaluate(target, pred, cfg, LossKind::kl, eps, true);
}

LossReport spatial_cross_entropy(const ImageGrid& target, const ImageGrid& pred,
                                 const kde::KdeJointConfig& cfg, double eps) {
    return evaluate(target, pred, cfg, LossKind::cross_entropy, eps, false);
}

LossReport spatial_hellinger(const ImageGrid& target, const ImageGrid& pred,
                             const kde::KdeJointConfig& cfg) {
    return evaluate(target, pred, cfg, LossKind::hellinger, default_eps, false);
}

double smoothed_entropy(const JointPmf& pmf, double eps) {
    double h = 0.0;
    for (double p : pmf.probs) {
        if (p > 0.0) h -= p * std::log(p + eps);
    }
    return h;
}

LossReport shuffle_averaged_loss(const ImageGrid& target, const ImageGrid& pred,
                                 const kde::KdeJointConfig& cfg, int count, std::uint64_t seed,
                                 LossKind kind, bool with_gradient, double eps) {
    const auto stencils = kde::shuffled_weights(cfg.weights, count, seed);

    LossReport mean;
    std::vector<double> grad_sum;
    std::vector<std::pair<kde::WindowOrigin, double>> window_sum;
    for (const auto& stencil : stencils) {
        kde::KdeJointConfig shuffled = cfg;
        shuffled.weights = stencil;
        LossReport one = evaluate(target, pred, shuffled, kind, eps, with_gradient);
        mean.value += one.value;
        if (one.per_window) {
            if (window_sum.empty()) {
                window_sum = *one.per_window;
            } else {
                for (std::size_t w = 0; w < window_sum.size(); ++w) {
                    window_sum[w].second += (*one.per_window)[w].second;
                }
            }
        }
        if (with_gradient) {
            if (grad_sum.empty()) {
                grad_sum = one.gradient->data();
            } else {
                const auto& d = one.gradient->data();
                for (std::size_t i = 0; i < grad_sum.size(); ++i) grad_sum[i] += d[i];
            }
        }
    }

    const double inv = 1.0 / count;
    mean.value *= inv;
    if (!window_sum.empty()) {
        for (auto& [origin, v] : window_sum) v *= inv;
        mean.per_window = std::move(window_sum);
    }
    if (with_gradient) {
        for (double& v : grad_sum) v *= inv;
        mean.gradient = pred.with_data(std::move(grad_sum));
    }
    return mean;
}

}  // namespace spen::losses
