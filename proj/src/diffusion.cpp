#include "spen/diffusion.hpp"

#include <cmath>

#include "spen/rng.hpp"

namespace spen::diffusion {

namespace {

void require_timestep(int t, const NoiseSchedule& schedule) {
    if (schedule.timesteps() == 0) {
        throw InvalidSchedule("empty noise schedule");
    }
    if (t < 1 || t > schedule.timesteps()) {
        throw InvalidTimestep("timestep " + std::to_string(t) + " outside [1, " +
                              std::to_string(schedule.timesteps()) + "]");
    }
}

}  // namespace

NoiseSchedule make_linear_schedule(int timesteps, double beta_start, double beta_end) {
    if (timesteps < 1) {
        throw InvalidSchedule("schedule requires at least one timestep");
    }
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || !(beta_start <= beta_end)) {
        throw InvalidSchedule("betas must satisfy 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule schedule;
    schedule.betas.resize(timesteps);
    schedule.alphas.resize(timesteps);
    schedule.alpha_bars.resize(timesteps);
    double bar = 1.0;
    for (int t = 0; t < timesteps; ++t) {
        const double beta =
            timesteps == 1
                ? beta_start
                : beta_start + (beta_end - beta_start) * t / static_cast<double>(timesteps - 1);
        schedule.betas[t] = beta;
        schedule.alphas[t] = 1.0 - beta;
        bar *= schedule.alphas[t];
        schedule.alpha_bars[t] = bar;
    }
    return schedule;
}

ImageGrid forward_step(const ImageGrid& x_prev, int t, const NoiseSchedule& schedule,
                       std::uint64_t seed) {
    require_timestep(t, schedule);
    validate_finite(x_prev);
    const double beta = schedule.betas[t - 1];
    const double keep = std::sqrt(1.0 - beta);
    const double add = std::sqrt(beta);
    const std::uint64_t step_seed = rng::derive(seed, static_cast<std::uint64_t>(t));
    std::vector<double> out(x_prev.size());
    const std::vector<double>& data = x_prev.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        out[i] = keep * data[i] + add * rng::normal_at(step_seed, i);
    }
    return x_prev.with_data(std::move(out));
}

std::pair<ImageGrid, ImageGrid> marginal_sample(const ImageGrid& x0, int t,
                                                const NoiseSchedule& schedule,
                                                std::uint64_t seed) {
    require_timestep(t, schedule);
    validate_finite(x0);
    const double bar = schedule.alpha_bars[t - 1];
    const double keep = std::sqrt(bar);
    const double add = std::sqrt(1.0 - bar);
    std::vector<double> noise(x0.size());
    std::vector<double> out(x0.size());
    const std::vector<double>& data = x0.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        noise[i] = rng::normal_at(seed, i);
        out[i] = keep * data[i] + add * noise[i];
    }
    ImageGrid xt = x0.with_data(std::move(out));
    ImageGrid z(x0.height(), x0.width(), x0.channels(), ValueRange{-4.0, 4.0}, std::move(noise));
    return {std::move(xt), std::move(z)};
}

losses::LossReport entropy_noise_matching(const ImageGrid& true_noise,
                                          const ImageGrid& pred_noise,
                                          const kde::KdeJointConfig& cfg, double eps) {
    return losses::spatial_kl(true_noise, pred_noise, cfg, eps);
}

}  // namespace spen::diffusion
