#include "spen/kde.hpp"

#include <cmath>
#include <numeric>

#include "spen/histograms.hpp"
#include "spen/rng.hpp"
#include "internal/joint_accum.hpp"

namespace spen::kde {

namespace {

constexpr double inv_sqrt_2pi = 0.3989422804014327;

// sigma(t) (1 - sigma(t)) evaluated through |t| so K(t) == K(-t) holds
// bit-exactly.
inline double sigmoid_derivative_value(double abs_t) {
    const double e = std::exp(-abs_t);
    const double d = 1.0 + e;
    return e / (d * d);
}

void require_normalizable(double total) {
    if (!(total > 0.0)) {
        throw DegeneratePmf("estimate carries no mass on the bin grid");
    }
}

detail::ChannelPlanes make_planes(const ImageGrid& img, const ImageGrid& tilde, int channel) {
    return {img.channel_plane(channel).data(), tilde.channel_plane(channel).data(), img.height(),
            img.width()};
}

}  // namespace

double kernel_value(const KernelSpec& kernel, double t) {
    const double a = std::abs(t);
    if (a > kernel.truncation_radius) return 0.0;
    switch (kernel.family) {
        case KernelFamily::box:
            return a < 1.0 ? 0.5 : 0.0;
        case KernelFamily::gaussian:
            return inv_sqrt_2pi * std::exp(-0.5 * t * t);
        case KernelFamily::sigmoid_derivative:
            return sigmoid_derivative_value(a);
    }
    return 0.0;
}

double kernel_derivative(const KernelSpec& kernel, double t) {
    const double a = std::abs(t);
    if (a > kernel.truncation_radius) return 0.0;
    switch (kernel.family) {
        case KernelFamily::box:
            throw NonDifferentiableKernel("box kernel has no derivative");
        case KernelFamily::gaussian:
            return -t * inv_sqrt_2pi * std::exp(-0.5 * t * t);
        case KernelFamily::sigmoid_derivative:
            // K'(t) = K(t) (1 - 2 sigma(t)) = -K(t) tanh(t/2)
            return -sigmoid_derivative_value(a) * std::tanh(0.5 * t);
    }
    return 0.0;
}

Pmf1D kde_pmf_1d(const ImageGrid& img, const KernelSpec& kernel, const BinGrid& bins,
                 bool normalize) {
    validate(kernel);
    validate_finite(img);
    std::vector<double> probs(bins.bin_count(), 0.0);
    std::vector<double> support;
    for (double x : img.data()) {
        const double u = bins.clamp_to_centers(x);
        const int first = detail::kernel_support(kernel, bins, u, support);
        for (std::size_t b = 0; b < support.size(); ++b) {
            probs[first + b] += support[b];
        }
    }
    const double scale = 1.0 / (static_cast<double>(img.size()) * kernel.bandwidth);
    for (double& p : probs) p *= scale;
    if (normalize) {
        const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
        require_normalizable(total);
        for (double& p : probs) p /= total;
    }
    return Pmf1D{std::move(probs), bins};
}

JointPmf kde_joint_pmf(const ImageGrid& img, const KdeJointConfig& cfg) {
    validate(cfg.kernel1);
    validate(cfg.kernel2);
    const ImageGrid tilde = hist::neighbor_mean(img, cfg.weights);

    const int b = cfg.bins.bin_count();
    std::vector<double> raw;
    std::vector<double> total(static_cast<std::size_t>(b) * b, 0.0);
    for (int k = 0; k < img.channels(); ++k) {
        const detail::ChannelPlanes planes = make_planes(img, tilde, k);
        detail::accumulate_joint(planes, detail::global_span(img.height(), img.width()), cfg, raw);
        for (std::size_t cell = 0; cell < total.size(); ++cell) total[cell] += raw[cell];
    }

    const double scale = 2.0 / (static_cast<double>(img.size()) * cfg.kernel1.bandwidth);
    for (double& p : total) p *= scale;
    if (cfg.normalize) {
        const double mass = std::accumulate(total.begin(), total.end(), 0.0);
        require_normalizable(mass);
        for (double& p : total) p /= mass;
    }
    return JointPmf{std::move(total), cfg.bins};
}

std::vector<std::pair<WindowOrigin, JointPmf>> windowed_joint_pmfs(const ImageGrid& img,
                                                                   const KdeJointConfig& cfg) {
    if (!cfg.window.has_value()) {
        throw Error("windowed_joint_pmfs requires a window configuration");
    }
    validate(cfg.kernel1);
    validate(cfg.kernel2);
    const ImageGrid tilde = hist::neighbor_mean(img, cfg.weights);
    const auto spans = detail::enumerate_windows(img.height(), img.width(), *cfg.window);

    std::vector<detail::ChannelPlanes> planes;
    for (int k = 0; k < img.channels(); ++k) {
        planes.push_back(make_planes(img, tilde, k));
    }

    const int b = cfg.bins.bin_count();
    const double pixels_per_window =
        static_cast<double>(cfg.window->window) * cfg.window->window * img.channels();
    const double scale = 2.0 / (pixels_per_window * cfg.kernel1.bandwidth);

    std::vector<std::pair<WindowOrigin, JointPmf>> result;
    result.reserve(spans.size());
    std::vector<double> raw;
    for (const auto& span : spans) {
        std::vector<double> total(static_cast<std::size_t>(b) * b, 0.0);
        for (const auto& plane : planes) {
            detail::accumulate_joint(plane, span, cfg, raw);
            for (std::size_t cell = 0; cell < total.size(); ++cell) total[cell] += raw[cell];
        }
        for (double& p : total) p *= scale;
        if (cfg.normalize) {
            const double mass = std::accumulate(total.begin(), total.end(), 0.0);
            require_normalizable(mass);
            for (double& p : total) p /= mass;
        }
        result.emplace_back(span.origin(), JointPmf{std::move(total), cfg.bins});
    }
    return result;
}

std::vector<NeighborWeights> shuffled_weights(const NeighborWeights& base, int count,
                                              std::uint64_t seed) {
    if (count < 1) {
        throw InvalidRange("shuffled_weights requires count >= 1");
    }
    rng::Stream stream(seed);
    std::vector<NeighborWeights> out;
    out.reserve(count);
    for (int n = 0; n < count; ++n) {
        std::array<double, 9> w{};
        double sum = 0.0;
        for (int k = 0; k < 9; ++k) {
            if (k == 4) continue;
            const double u = stream.next_unit();
            // entries absent from the base stencil stay absent
            w[k] = base.weights()[k] > 0.0 ? u : 0.0;
            sum += w[k];
        }
        for (double& v : w) v /= sum;
        w[4] = 0.0;
        out.emplace_back(w, seed);
    }
    return out;
}

}  // namespace spen::kde
