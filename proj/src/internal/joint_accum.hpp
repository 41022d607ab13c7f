#pragma once

#include <cmath>
#include <vector>

#include "spen/core.hpp"
#include "spen/kde.hpp"

// Shared internals for the joint estimators and the losses built on them.

namespace spen::detail {

inline int reflect(int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}

/// Rectangular evaluation region. Coordinates are stored shifted by `pad`;
/// image_row/image_col fold padded coordinates back into the image by
/// mirroring, which is the identity when pad is 0.
struct WindowSpan {
    int row0 = 0;
    int col0 = 0;
    int rows = 0;
    int cols = 0;
    int pad = 0;

    int image_row(int i, int height) const { return reflect(row0 + i - pad, height); }
    int image_col(int j, int width) const { return reflect(col0 + j - pad, width); }
    kde::WindowOrigin origin() const { return {row0 - pad, col0 - pad}; }
};

inline WindowSpan global_span(int height, int width) { return {0, 0, height, width, 0}; }

inline std::vector<WindowSpan> enumerate_windows(int height, int width, const WindowConfig& cfg) {
    validate(cfg, height, width);
    std::vector<WindowSpan> spans;
    if (cfg.padding == WindowPadding::none) {
        for (int r = 0; r + cfg.window <= height; r += cfg.stride) {
            for (int c = 0; c + cfg.window <= width; c += cfg.stride) {
                spans.push_back({r, c, cfg.window, cfg.window, 0});
            }
        }
    } else {
        const int pad = (cfg.window - 1) / 2;
        for (int r = 0; r < height; r += cfg.stride) {
            for (int c = 0; c < width; c += cfg.stride) {
                spans.push_back({r, c, cfg.window, cfg.window, pad});
            }
        }
    }
    return spans;
}

/// Kernel values K((u - c_b)/h) for the bins reachable from u, i.e. those
/// with |u - c_b| <= radius * h. Returns the first reachable index; `out` is
/// reused across calls. The range may be empty when the reach is narrower
/// than the bin spacing.
inline int kernel_support(const KernelSpec& kernel, const BinGrid& bins, double u,
                          std::vector<double>& out) {
    const double reach = kernel.truncation_radius * kernel.bandwidth;
    const double lo = (u - reach - bins.vmin()) / bins.delta() - 0.5;
    const double hi = (u + reach - bins.vmin()) / bins.delta() - 0.5;
    const int first = static_cast<int>(std::ceil(std::max(lo, 0.0)));
    const int last = static_cast<int>(std::floor(std::min(hi, bins.bin_count() - 1.0)));
    out.clear();
    for (int b = first; b <= last; ++b) {
        out.push_back(kde::kernel_value(kernel, (u - bins.center(b)) / kernel.bandwidth));
    }
    return first;
}

/// Same support, filled with dK/dt instead of K.
inline int kernel_support_derivative(const KernelSpec& kernel, const BinGrid& bins, double u,
                                     std::vector<double>& out) {
    const double reach = kernel.truncation_radius * kernel.bandwidth;
    const double lo = (u - reach - bins.vmin()) / bins.delta() - 0.5;
    const double hi = (u + reach - bins.vmin()) / bins.delta() - 0.5;
    const int first = static_cast<int>(std::ceil(std::max(lo, 0.0)));
    const int last = static_cast<int>(std::floor(std::min(hi, bins.bin_count() - 1.0)));
    out.clear();
    for (int b = first; b <= last; ++b) {
        out.push_back(kde::kernel_derivative(kernel, (u - bins.center(b)) / kernel.bandwidth));
    }
    return first;
}

/// K and dK/dt over the same bin range in one pass.
inline int kernel_support_pair(const KernelSpec& kernel, const BinGrid& bins, double u,
                               std::vector<double>& values, std::vector<double>& derivs) {
    const double reach = kernel.truncation_radius * kernel.bandwidth;
    const double lo = (u - reach - bins.vmin()) / bins.delta() - 0.5;
    const double hi = (u + reach - bins.vmin()) / bins.delta() - 0.5;
    const int first = static_cast<int>(std::ceil(std::max(lo, 0.0)));
    const int last = static_cast<int>(std::floor(std::min(hi, bins.bin_count() - 1.0)));
    values.clear();
    derivs.clear();
    for (int b = first; b <= last; ++b) {
        const double t = (u - bins.center(b)) / kernel.bandwidth;
        values.push_back(kde::kernel_value(kernel, t));
        derivs.push_back(kde::kernel_derivative(kernel, t));
    }
    return first;
}

/// One channel of an image together with its continuous neighbor means.
struct ChannelPlanes {
    std::vector<double> values;
    std::vector<double> tilde;
    int height = 0;
    int width = 0;
};

/// Unscaled joint accumulation over one span: for every covered pixel the
/// outer product of the two kernel supports is added to `raw` (B x B,
/// value axis major). The caller applies prefactors and normalization.
inline void accumulate_joint(const ChannelPlanes& planes, const WindowSpan& span,
                             const kde::KdeJointConfig& cfg, std::vector<double>& raw) {
    const int b = cfg.bins.bin_count();
    raw.assign(static_cast<std::size_t>(b) * b, 0.0);
    std::vector<double> k1, k2;
    for (int i = 0; i < span.rows; ++i) {
        const int r = span.image_row(i, planes.height);
        for (int j = 0; j < span.cols; ++j) {
            const int c = span.image_col(j, planes.width);
            const std::size_t p = static_cast<std::size_t>(r) * planes.width + c;
            const double u = cfg.bins.clamp_to_centers(planes.values[p]);
            const double v = cfg.bins.clamp_to_centers(planes.tilde[p]);
            const int f1 = kernel_support(cfg.kernel1, cfg.bins, u, k1);
            const int f2 = kernel_support(cfg.kernel2, cfg.bins, v, k2);
            for (std::size_t a = 0; a < k1.size(); ++a) {
                double* row = raw.data() + static_cast<std::size_t>(f1 + a) * b + f2;
                const double ka = k1[a];
                for (std::size_t bb = 0; bb < k2.size(); ++bb) {
                    row[bb] += ka * k2[bb];
                }
            }
        }
    }
}

}  // namespace spen::detail
