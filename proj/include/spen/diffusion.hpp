#pragma once

#include <cstdint>
#include <utility>

#include "spen/core.hpp"
#include "spen/kde.hpp"
#include "spen/losses.hpp"

namespace spen::diffusion {

/// Forward-process noise schedule. Timesteps are 1-based: betas[t-1] is the
/// variance added at step t. alpha_bars holds the running products
/// prod_{s<=t} (1 - beta_s) and is strictly decreasing.
struct NoiseSchedule {
    std::vector<double> betas;
    std::vector<double> alphas;
    std::vector<double> alpha_bars;

    int timesteps() const { return static_cast<int>(betas.size()); }
};

/// Linearly spaced betas from beta_start to beta_end inclusive. Requires
/// T >= 1 and 0 < beta_start <= beta_end < 1.
NoiseSchedule make_linear_schedule(int timesteps, double beta_start, double beta_end);

/// One forward step: x_t = sqrt(1 - beta_t) x_{t-1} + sqrt(beta_t) z with
/// z ~ N(0, I). Noise is a pure function of (seed, t, pixel index), so the
/// result is reproducible regardless of evaluation order.
ImageGrid forward_step(const ImageGrid& x_prev, int t, const NoiseSchedule& schedule,
                       std::uint64_t seed);

/// Jump straight to timestep t:
/// x_t = sqrt(alpha_bar_t) x_0 + sqrt(1 - alpha_bar_t) z.
/// Returns (x_t, z) so the injected noise can serve as a target.
std::pair<ImageGrid, ImageGrid> marginal_sample(const ImageGrid& x0, int t,
                                                const NoiseSchedule& schedule, std::uint64_t seed);

/// Distribution-level noise-matching objective: the spatial KL divergence
/// between the joint estimates of the true and predicted noise fields.
losses::LossReport entropy_noise_matching(const ImageGrid& true_noise,
                                          const ImageGrid& pred_noise,
                                          const kde::KdeJointConfig& cfg,
                                          double eps = losses::default_eps);

}  // namespace spen::diffusion
