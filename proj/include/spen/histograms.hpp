#pragma once

#include "spen/core.hpp"

namespace spen::hist {

/// Weighted mean of the 8 neighbors at every pixel, computed per channel.
/// Image borders are handled by mirroring indices across the edge pixel
/// (index -1 reads row 1, index H reads row H-2). Requires H, W >= 3.
ImageGrid neighbor_mean(const ImageGrid& img, const NeighborWeights& weights);

/// neighbor_mean with every output value snapped to the nearest bin center.
ImageGrid neighbor_mean_rounded(const ImageGrid& img, const NeighborWeights& weights,
                                const BinGrid& bins);

/// Counting histogram of pixel values, normalized by the pixel count. Values
/// outside the grid are clamped to the closest bin. Multi-channel images pool
/// all channels, which equals averaging the per-channel PMFs.
Pmf1D hard_pmf_1d(const ImageGrid& img, const BinGrid& bins);

/// Counting histogram of (value, rounded neighbor-mean) tuples.
JointPmf hard_joint_pmf(const ImageGrid& img, const BinGrid& bins, const NeighborWeights& weights);

/// -sum_b p_b log p_b in nats, with 0 log 0 = 0.
double shannon_entropy(const Pmf1D& pmf);

/// -sum_{i,j} p_ij log p_ij in nats, with 0 log 0 = 0.
double spatial_entropy(const JointPmf& pmf);

}  // namespace spen::hist
