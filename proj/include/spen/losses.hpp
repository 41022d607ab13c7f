#pragma once

#include <utility>

#include "spen/core.hpp"
#include "spen/kde.hpp"

namespace spen::losses {

enum class LossKind { kl, cross_entropy, hellinger };

inline constexpr double default_eps = 1e-10;

struct LossReport {
    double value = 0.0;
    /// Per-window values when cfg.window is set; the aggregate is their mean.
    std::optional<std::vector<std::pair<kde::WindowOrigin, double>>> per_window;
    /// d value / d pred, same shape as the prediction, when requested.
    std::optional<ImageGrid> gradient;
};

/// General entry point: builds the joint estimates P (target) and Q (pred)
/// per window and channel, evaluates the divergence, averages over windows
/// and channels, and optionally backpropagates to the prediction pixels.
/// Both estimates are normalized regardless of cfg.normalize, since the
/// divergences presuppose probability distributions; the gradient therefore
/// includes the renormalization term
///   dL/draw_b = (g_b - sum_c g_c q_c) / Z.
/// Gradients require differentiable kernels on both axes.
LossReport evaluate(const ImageGrid& target, const ImageGrid& pred, const kde::KdeJointConfig& cfg,
                    LossKind kind, double eps, bool with_gradient);

/// D(P || Q) = -sum_ij p_ij log((q_ij + eps) / (p_ij + eps)); cells with
/// p_ij = 0 contribute 0.
LossReport spatial_kl(const ImageGrid& target, const ImageGrid& pred,
                      const kde::KdeJointConfig& cfg, double eps = default_eps);

/// spatial_kl plus its gradient with respect to the prediction.
LossReport spatial_kl_grad(const ImageGrid& target, const ImageGrid& pred,
                           const kde::KdeJointConfig& cfg, double eps = default_eps);

/// CE(P, Q) = -sum_ij p_ij log(q_ij + eps). Equals smoothed_entropy(P, eps)
/// plus the KL divergence above, exactly.
LossReport spatial_cross_entropy(const ImageGrid& target, const ImageGrid& pred,
                                 const kde::KdeJointConfig& cfg, double eps = default_eps);

/// Squared Hellinger distance 1/2 sum_ij (sqrt(p_ij) - sqrt(q_ij))^2,
/// symmetric and contained in [0, 1].
LossReport spatial_hellinger(const ImageGrid& target, const ImageGrid& pred,
                             const kde::KdeJointConfig& cfg);

/// -sum p log(p + eps): the entropy under the same smoothing convention the
/// divergences use, so CE = entropy + KL closes exactly.
double smoothed_entropy(const JointPmf& pmf, double eps = default_eps);

/// Mean of the selected loss over `count` randomized neighbor stencils drawn
/// from cfg.weights (see kde::shuffled_weights); deterministic in the seed.
LossReport shuffle_averaged_loss(const ImageGrid& target, const ImageGrid& pred,
                                 const kde::KdeJointConfig& cfg, int count, std::uint64_t seed,
                                 LossKind kind = LossKind::kl, bool with_gradient = false,
                                 double eps = default_eps);

}  // namespace spen::losses
