#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spen/core.hpp"
#include "spen/kde.hpp"
#include "spen/losses.hpp"

namespace spen::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_io = 3;
inline constexpr int exit_numeric = 4;

struct MatchOptions {
    kde::KdeJointConfig cfg;
    losses::LossKind loss = losses::LossKind::kl;
    double eps = losses::default_eps;
    int iterations = 500;
    /// Step size for plain projected gradient descent. The useful scale
    /// depends strongly on the estimator configuration: gradients shrink
    /// with wider kernels and larger images, so tune per setup.
    double learning_rate = 100.0;
    int shuffles = 0;
    std::uint64_t seed = 0;
};

struct MatchResult {
    ImageGrid image;
    /// losses[i] is the loss at iterate i; iterations + 1 entries, the last
    /// one evaluated after the final update.
    std::vector<double> losses;
};

/// Gradient descent on the selected spatial loss, projecting each iterate
/// back onto the declared value range so pixels cannot strand outside the
/// bin grid where the loss is flat. With shuffles > 0 every iteration
/// averages the loss over freshly drawn stencils (sub-seeded per iteration),
/// so reruns with the same seed are bit-identical.
MatchResult run_match(const ImageGrid& target, const ImageGrid& init, const MatchOptions& opts);

/// Command-line entry point (arguments without the program name); returns
/// the process exit code: 0 success, 2 usage, 3 I/O, 4 numeric.
int run(const std::vector<std::string>& args);

}  // namespace spen::cli
