#pragma once

#include <utility>

#include "spen/core.hpp"

namespace spen::kde {

/// K(t) with the truncation applied: 0 for |t| > truncation_radius.
/// box: 1/2 on |t| < 1; gaussian: (2*pi)^(-1/2) exp(-t^2/2);
/// sigmoid_derivative: sigma(t) (1 - sigma(t)).
double kernel_value(const KernelSpec& kernel, double t);

/// dK/dt, 0 beyond the truncation radius. Throws NonDifferentiableKernel for
/// the box family.
double kernel_derivative(const KernelSpec& kernel, double t);

/// Kernel density estimate of the value distribution on the bin grid:
/// raw_b = 1/(N h) sum_x K((x - center_b) / h), with values clamped onto the
/// span of bin centers first. Multi-channel images pool all channels.
/// normalize divides by the grid total; throws DegeneratePmf if that total
/// is zero.
Pmf1D kde_pmf_1d(const ImageGrid& img, const KernelSpec& kernel, const BinGrid& bins,
                 bool normalize = true);

struct KdeJointConfig {
    KernelSpec kernel1 = KernelSpec::gaussian();  // pixel-value axis
    KernelSpec kernel2 = KernelSpec::gaussian();  // neighbor-mean axis
    BinGrid bins = integer_preset_bins();
    NeighborWeights weights = NeighborWeights::uniform();
    std::optional<WindowConfig> window;  // nullopt evaluates globally
    bool normalize = true;
};

/// Joint density estimate of (value, neighbor-mean) tuples over the whole
/// image: raw_ij = 2/(N h1) sum_x K1((x - c_i)/h1) K2((x~ - c_j)/h2), where
/// x~ is the continuous 8-neighbor weighted mean. cfg.window is ignored here.
JointPmf kde_joint_pmf(const ImageGrid& img, const KdeJointConfig& cfg);

struct WindowOrigin {
    int row;
    int col;
};

/// Joint estimate per sliding window, N = window^2 pixels each. Neighbor
/// means always come from the full image (mirrored only at image borders).
/// Origins are top-left corners in image coordinates; with reflect padding
/// the first origins are negative.
std::vector<std::pair<WindowOrigin, JointPmf>> windowed_joint_pmfs(const ImageGrid& img,
                                                                   const KdeJointConfig& cfg);

/// Draws `count` randomized stencils: 8 weights i.i.d. uniform(0,1), center
/// forced to 0, renormalized to sum 1. Deterministic in (seed, count); the
/// base stencil defines which entries participate (zero entries stay zero).
std::vector<NeighborWeights> shuffled_weights(const NeighborWeights& base, int count,
                                              std::uint64_t seed);

}  // namespace spen::kde
