#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spen/diffusion.hpp"
#include "spen/gradcheck.hpp"
#include "spen/histograms.hpp"
#include "spen/pgm.hpp"
#include "spen/rng.hpp"

namespace spen::cli {

namespace {

using nlohmann::json;

struct CommonOpts {
    int bins = 256;
    std::string range = "-0.5:255.5";
    std::string kernel = "gaussian";
    double bandwidth = 1.0;
    int window = 11;
    int stride = 11;
    bool global_only = false;
    int shuffles = 0;
    std::uint64_t seed = 0;
    double eps = losses::default_eps;
    std::string json_path;
    std::string csv_path;
};

// Flags are registered per subcommand so that, say, `entropy --window` is an
// unknown option rather than a silently ignored one.
void add_estimator_flags(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--bins", o.bins, "number of histogram bins")->capture_default_str();
    sub->add_option("--range", o.range, "value range as vmin:vmax")->capture_default_str();
    sub->add_option("--kernel", o.kernel, "kernel family")
        ->check(CLI::IsMember({"box", "gaussian", "sigmoid"}))
        ->capture_default_str();
    sub->add_option("--bandwidth", o.bandwidth, "kernel bandwidth h")->capture_default_str();
    sub->add_option("--seed", o.seed, "seed for randomized stencils and sampling")
        ->capture_default_str();
    sub->add_option("--json", o.json_path, "write a JSON report to this path");
}

void add_window_flags(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--window", o.window, "sliding window size")->capture_default_str();
    sub->add_option("--stride", o.stride, "sliding window stride")->capture_default_str();
    sub->add_flag("--global", o.global_only, "evaluate globally instead of windowed");
}

void add_shuffles_flag(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--shuffles", o.shuffles, "number of randomized neighbor stencils")
        ->capture_default_str();
}

void add_eps_flag(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--eps", o.eps, "smoothing epsilon for the losses")->capture_default_str();
}

void add_csv_flag(CLI::App* sub, CommonOpts& o, const char* what) {
    sub->add_option("--csv", o.csv_path, what);
}

ValueRange parse_range(const std::string& text) {
    const std::size_t colon = text.find(':', 1);  // skip a leading sign
    if (colon == std::string::npos) {
        throw InvalidRange("range must be vmin:vmax, got '" + text + "'");
    }
    try {
        std::size_t used = 0;
        const double vmin = std::stod(text.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("vmin");
        const std::string rest = text.substr(colon + 1);
        const double vmax = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("vmax");
        return {vmin, vmax};
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw InvalidRange("range must be vmin:vmax, got '" + text + "'");
    }
}

KernelSpec make_kernel(const std::string& name, double bandwidth) {
    if (name == "box") return KernelSpec::box(bandwidth);
    if (name == "gaussian") return KernelSpec::gaussian(bandwidth);
    if (name == "sigmoid") return KernelSpec::sigmoid_derivative(bandwidth);
    throw InvalidRange("unknown kernel family '" + name + "'");
}

kde::KdeJointConfig build_config(const CommonOpts& o, bool windowed) {
    const ValueRange range = parse_range(o.range);
    kde::KdeJointConfig cfg;
    cfg.kernel1 = make_kernel(o.kernel, o.bandwidth);
    cfg.kernel2 = cfg.kernel1;
    cfg.bins = make_bin_grid(o.bins, range.vmin, range.vmax);
    cfg.weights = NeighborWeights::uniform();
    if (windowed) {
        cfg.window = WindowConfig{o.window, o.stride, WindowPadding::none};
    }
    return cfg;
}

json config_json(const CommonOpts& o, bool windowed, bool shuffled, bool with_eps) {
    const ValueRange range = parse_range(o.range);
    json cfg{{"bins", o.bins},
             {"range", o.range},
             {"vmin", range.vmin},
             {"vmax", range.vmax},
             {"kernel", o.kernel},
             {"bandwidth", o.bandwidth},
             {"truncation_radius", make_kernel(o.kernel, o.bandwidth).truncation_radius},
             {"seed", o.seed}};
    if (windowed) {
        cfg["window"] = o.window;
        cfg["stride"] = o.stride;
        cfg["global"] = o.global_only;
    }
    if (shuffled) {
        cfg["shuffles"] = o.shuffles;
    }
    if (with_eps) {
        cfg["eps"] = o.eps;
    }
    return cfg;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw io::WriteFailure("cannot open '" + tmp + "' for writing");
        }
        out << content;
        if (!out) {
            throw io::WriteFailure("short write to '" + tmp + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw io::WriteFailure("cannot move temporary onto '" + path + "': " + ec.message());
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void emit_json(const CommonOpts& o, const json& report) {
    if (!o.json_path.empty()) {
        write_text_atomic(o.json_path, report.dump(2) + "\n");
    }
}

double pixel_mse(const ImageGrid& a, const ImageGrid& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

// ---- entropy ----------------------------------------------------------

int cmd_entropy(const std::string& input, const CommonOpts& o) {
    const ImageGrid img = io::load_pgm(input);
    const kde::KdeJointConfig cfg = build_config(o, false);

    json channels = json::array();
    for (int k = 0; k < img.channels(); ++k) {
        const ImageGrid plane = img.channel_plane(k);
        const Pmf1D hard_1d = hist::hard_pmf_1d(plane, cfg.bins);
        const Pmf1D kde_1d = kde::kde_pmf_1d(plane, cfg.kernel1, cfg.bins);
        const JointPmf hard_joint = hist::hard_joint_pmf(plane, cfg.bins, cfg.weights);

        double kde_spatial = 0.0;
        if (o.shuffles > 0) {
            const auto stencils = kde::shuffled_weights(cfg.weights, o.shuffles, o.seed);
            for (const auto& stencil : stencils) {
                kde::KdeJointConfig shuffled = cfg;
                shuffled.weights = stencil;
                kde_spatial += hist::spatial_entropy(kde::kde_joint_pmf(plane, shuffled));
            }
            kde_spatial /= o.shuffles;
        } else {
            kde_spatial = hist::spatial_entropy(kde::kde_joint_pmf(plane, cfg));
        }

        json entry{{"channel", k},
                   {"entropy_1d_hard", hist::shannon_entropy(hard_1d)},
                   {"entropy_1d_kde", hist::shannon_entropy(kde_1d)},
                   {"spatial_entropy_hard", hist::spatial_entropy(hard_joint)},
                   {"spatial_entropy_kde", kde_spatial}};
        channels.push_back(entry);
        std::cout << "channel " << k << ": entropy_1d_hard=" << format_double(entry["entropy_1d_hard"])
                  << " entropy_1d_kde=" << format_double(entry["entropy_1d_kde"])
                  << " spatial_entropy_hard=" << format_double(entry["spatial_entropy_hard"])
                  << " spatial_entropy_kde=" << format_double(entry["spatial_entropy_kde"]) << "\n";
    }

    emit_json(o, json{{"command", "entropy"},
                      {"input", input},
                      {"config", config_json(o, false, true, false)},
                      {"channels", channels}});
    return exit_ok;
}

// ---- kl ----------------------------------------------------------------

int cmd_kl(const std::string& target_path, const std::string& pred_path, const CommonOpts& o) {
    if (o.global_only && !o.csv_path.empty()) {
        throw InvalidRange("per-window CSV requires windowed evaluation, drop --global");
    }
    const ImageGrid target = io::load_pgm(target_path);
    const ImageGrid pred = io::load_pgm(pred_path);

    const kde::KdeJointConfig global_cfg = build_config(o, false);
    const auto eval = [&](const kde::KdeJointConfig& cfg, losses::LossKind kind) {
        if (o.shuffles > 0) {
            return losses::shuffle_averaged_loss(target, pred, cfg, o.shuffles, o.seed, kind,
                                                 false, o.eps);
        }
        return losses::evaluate(target, pred, cfg, kind, o.eps, false);
    };

    const double kl_global = eval(global_cfg, losses::LossKind::kl).value;
    const double ce_global = eval(global_cfg, losses::LossKind::cross_entropy).value;
    const double hel_global = eval(global_cfg, losses::LossKind::hellinger).value;

    json report{{"command", "kl"},
                {"target", target_path},
                {"pred", pred_path},
                {"config", config_json(o, true, true, true)},
                {"global",
                 {{"kl", kl_global}, {"cross_entropy", ce_global}, {"hellinger", hel_global}}}};
    std::cout << "global: kl=" << format_double(kl_global) << " cross_entropy="
              << format_double(ce_global) << " hellinger=" << format_double(hel_global) << "\n";

    if (!o.global_only) {
        const kde::KdeJointConfig windowed_cfg = build_config(o, true);
        const losses::LossReport kl_win = eval(windowed_cfg, losses::LossKind::kl);
        const double ce_win = eval(windowed_cfg, losses::LossKind::cross_entropy).value;
        const double hel_win = eval(windowed_cfg, losses::LossKind::hellinger).value;
        report["windowed"] = {{"kl", kl_win.value},
                              {"cross_entropy", ce_win},
                              {"hellinger", hel_win},
                              {"window_count", kl_win.per_window->size()}};
        std::cout << "windowed mean over " << kl_win.per_window->size()
                  << " windows: kl=" << format_double(kl_win.value)
                  << " cross_entropy=" << format_double(ce_win)
                  << " hellinger=" << format_double(hel_win) << "\n";

        if (!o.csv_path.empty()) {
            std::string csv = "origin_row,origin_col,value\n";
            for (const auto& [origin, value] : *kl_win.per_window) {
                csv += std::to_string(origin.row) + "," + std::to_string(origin.col) + "," +
                       format_double(value) + "\n";
            }
            write_text_atomic(o.csv_path, csv);
        }
    }

    emit_json(o, report);
    return exit_ok;
}

// ---- match -------------------------------------------------------------

struct MatchCliOpts {
    int iterations = 500;
    double learning_rate = 100.0;
    std::string loss = "kl";
    std::string out_path = "match_out.pgm";
};

losses::LossKind parse_loss(const std::string& name) {
    if (name == "kl") return losses::LossKind::kl;
    if (name == "ce") return losses::LossKind::cross_entropy;
    if (name == "hellinger") return losses::LossKind::hellinger;
    throw InvalidRange("unknown loss '" + name + "'");
}

int cmd_match(const std::string& target_path, const std::string& init_path, const CommonOpts& o,
              const MatchCliOpts& m) {
    const ImageGrid target = io::load_pgm(target_path);
    const ImageGrid init = io::load_pgm(init_path);

    MatchOptions opts;
    opts.cfg = build_config(o, !o.global_only);
    opts.loss = parse_loss(m.loss);
    opts.eps = o.eps;
    opts.iterations = m.iterations;
    opts.learning_rate = m.learning_rate;
    opts.shuffles = o.shuffles;
    opts.seed = o.seed;

    const MatchResult result = run_match(target, init, opts);
    io::save_pgm(result.image, m.out_path);

    if (!o.csv_path.empty()) {
        std::string csv = "iter,loss\n";
        for (std::size_t i = 0; i < result.losses.size(); ++i) {
            csv += std::to_string(i) + "," + format_double(result.losses[i]) + "\n";
        }
        write_text_atomic(o.csv_path, csv);
    }

    json report{{"command", "match"},
                {"target", target_path},
                {"init", init_path},
                {"out", m.out_path},
                {"config", config_json(o, true, true, true)},
                {"loss", m.loss},
                {"iterations", m.iterations},
                {"learning_rate", m.learning_rate},
                {"initial_loss", result.losses.front()},
                {"final_loss", result.losses.back()}};
    emit_json(o, report);

    std::cout << "match: initial_loss=" << format_double(result.losses.front())
              << " final_loss=" << format_double(result.losses.back()) << " image written to "
              << m.out_path << "\n";
    return exit_ok;
}

// ---- noise-demo --------------------------------------------------------

struct NoiseDemoOpts {
    int timesteps = 10;
    double beta_start = 0.05;
    double beta_end = 0.2;
    int t = 5;
    int size = 64;
};

ImageGrid checkerboard(int size) {
    std::vector<double> data(static_cast<std::size_t>(size) * size);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            data[static_cast<std::size_t>(r) * size + c] = ((r / 4 + c / 4) % 2 == 0) ? 0.0 : 1.0;
        }
    }
    return ImageGrid(size, size, ValueRange{-0.5, 1.5}, std::move(data));
}

int cmd_noise_demo(const CommonOpts& o, const NoiseDemoOpts& d) {
    const auto schedule = diffusion::make_linear_schedule(d.timesteps, d.beta_start, d.beta_end);
    const ImageGrid x0 = checkerboard(d.size);
    const auto [xt, noise] = diffusion::marginal_sample(x0, d.t, schedule, o.seed);

    kde::KdeJointConfig cfg = build_config(o, !o.global_only);

    const auto scaled = [&](double factor) {
        std::vector<double> data = noise.data();
        for (double& v : data) v *= factor;
        return noise.with_data(std::move(data));
    };

    struct Row {
        const char* name;
        ImageGrid pred;
    };
    const Row rows[] = {{"true", scaled(1.0)}, {"scaled", scaled(0.9)}, {"zero", scaled(0.0)}};

    json table = json::array();
    std::string csv = "pred,entropy_loss,mse\n";
    for (const auto& row : rows) {
        const double loss = diffusion::entropy_noise_matching(noise, row.pred, cfg, o.eps).value;
        const double mse = pixel_mse(noise, row.pred);
        table.push_back(json{{"pred", row.name}, {"entropy_loss", loss}, {"mse", mse}});
        csv += std::string(row.name) + "," + format_double(loss) + "," + format_double(mse) + "\n";
    }
    std::cout << csv;
    if (!o.csv_path.empty()) {
        write_text_atomic(o.csv_path, csv);
    }

    emit_json(o, json{{"command", "noise-demo"},
                      {"config", config_json(o, true, false, true)},
                      {"timesteps", d.timesteps},
                      {"beta_start", d.beta_start},
                      {"beta_end", d.beta_end},
                      {"t", d.t},
                      {"size", d.size},
                      {"rows", table}});
    return exit_ok;
}

}  // namespace

MatchResult run_match(const ImageGrid& target, const ImageGrid& init, const MatchOptions& opts) {
    if (opts.iterations < 1) {
        throw InvalidRange("match requires at least one iteration");
    }
    if (!(opts.learning_rate > 0.0) || !std::isfinite(opts.learning_rate)) {
        throw InvalidRange("learning rate must be positive and finite");
    }

    const ValueRange range = init.value_range();
    ImageGrid x = init;
    std::vector<double> curve;
    curve.reserve(opts.iterations + 1);

    const auto eval = [&](const ImageGrid& current, bool with_grad) {
        if (opts.shuffles > 0) {
            const std::uint64_t step_seed =
                rng::derive(opts.seed, static_cast<std::uint64_t>(curve.size()));
            return losses::shuffle_averaged_loss(target, current, opts.cfg, opts.shuffles,
                                                 step_seed, opts.loss, with_grad, opts.eps);
        }
        return losses::evaluate(target, current, opts.cfg, opts.loss, opts.eps, with_grad);
    };

    for (int iter = 0; iter < opts.iterations; ++iter) {
        const losses::LossReport report = eval(x, true);
        curve.push_back(report.value);
        const std::vector<double>& g = report.gradient->data();
        std::vector<double> next = x.data();
        for (std::size_t i = 0; i < next.size(); ++i) {
            next[i] = std::clamp(next[i] - opts.learning_rate * g[i], range.vmin, range.vmax);
        }
        x = x.with_data(std::move(next));
    }
    curve.push_back(eval(x, false).value);
    return {std::move(x), std::move(curve)};
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"differentiable spatial-entropy statistics for images"};
    app.require_subcommand(1);

    CommonOpts entropy_opts;
    std::string entropy_input;
    CLI::App* entropy = app.add_subcommand("entropy", "1D and spatial entropy of an image");
    entropy->add_option("image", entropy_input, "input image (binary PGM)")->required();
    add_estimator_flags(entropy, entropy_opts);
    add_shuffles_flag(entropy, entropy_opts);

    CommonOpts kl_opts;
    std::string kl_target, kl_pred;
    CLI::App* kl = app.add_subcommand("kl", "spatial divergences between two images");
    kl->add_option("target", kl_target, "target image (binary PGM)")->required();
    kl->add_option("pred", kl_pred, "predicted image (binary PGM)")->required();
    add_estimator_flags(kl, kl_opts);
    add_window_flags(kl, kl_opts);
    add_shuffles_flag(kl, kl_opts);
    add_eps_flag(kl, kl_opts);
    add_csv_flag(kl, kl_opts, "write per-window KL values as CSV");

    CommonOpts match_opts;
    MatchCliOpts match_cli;
    std::string match_target, match_init;
    CLI::App* match = app.add_subcommand("match", "gradient-descend an image onto a target's statistics");
    match->add_option("target", match_target, "target image (binary PGM)")->required();
    match->add_option("init", match_init, "starting image (binary PGM)")->required();
    match->add_option("--iters", match_cli.iterations, "gradient steps")->capture_default_str();
    match->add_option("--lr", match_cli.learning_rate, "learning rate")->capture_default_str();
    match->add_option("--loss", match_cli.loss, "objective")
        ->check(CLI::IsMember({"kl", "ce", "hellinger"}))
        ->capture_default_str();
    match->add_option("--out", match_cli.out_path, "output image path")->capture_default_str();
    add_estimator_flags(match, match_opts);
    add_window_flags(match, match_opts);
    add_shuffles_flag(match, match_opts);
    add_eps_flag(match, match_opts);
    add_csv_flag(match, match_opts, "write the loss curve as CSV");

    CommonOpts demo_opts;
    demo_opts.bins = 64;
    demo_opts.range = "-4:4";
    demo_opts.bandwidth = 0.125;
    NoiseDemoOpts demo_cli;
    CLI::App* demo = app.add_subcommand("noise-demo", "forward-process noise matching comparison");
    demo->add_option("--timesteps", demo_cli.timesteps, "schedule length")->capture_default_str();
    demo->add_option("--beta-start", demo_cli.beta_start, "first beta")->capture_default_str();
    demo->add_option("--beta-end", demo_cli.beta_end, "last beta")->capture_default_str();
    demo->add_option("--t", demo_cli.t, "timestep to sample")->capture_default_str();
    demo->add_option("--size", demo_cli.size, "synthetic image side length")->capture_default_str();
    add_estimator_flags(demo, demo_opts);
    add_window_flags(demo, demo_opts);
    add_eps_flag(demo, demo_opts);
    add_csv_flag(demo, demo_opts, "write the comparison table as CSV");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (entropy->parsed()) return cmd_entropy(entropy_input, entropy_opts);
        if (kl->parsed()) return cmd_kl(kl_target, kl_pred, kl_opts);
        if (match->parsed()) return cmd_match(match_target, match_init, match_opts, match_cli);
        if (demo->parsed()) return cmd_noise_demo(demo_opts, demo_cli);
        std::cerr << "no subcommand selected\n";
        return exit_usage;
    } catch (const io::FileNotFound& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const io::UnsupportedFormat& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const io::WriteFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const NonFiniteData& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const DegeneratePmf& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace spen::cli
