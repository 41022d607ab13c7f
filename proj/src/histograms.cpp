#include "spen/histograms.hpp"

#include <cmath>

namespace spen::hist {

namespace {

// Mirror an index across the edge without repeating the edge pixel.
inline int reflect(int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}

void require_at_least_3x3(const ImageGrid& img) {
    if (img.height() < 3 || img.width() < 3) {
        throw ImageTooSmall("neighbor statistics require at least a 3x3 image, got " +
                            std::to_string(img.height()) + "x" + std::to_string(img.width()));
    }
}

}  // namespace

ImageGrid neighbor_mean(const ImageGrid& img, const NeighborWeights& weights) {
    require_at_least_3x3(img);
    validate_finite(img);
    const int h = img.height(), w = img.width(), ch = img.channels();
    std::vector<double> out(img.size());
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            for (int k = 0; k < ch; ++k) {
                double acc = 0.0;
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (dr == 0 && dc == 0) continue;
                        acc += weights.weight(dr, dc) *
                               img.at(reflect(r + dr, h), reflect(c + dc, w), k);
                    }
                }
                out[img.index(r, c, k)] = acc;
            }
        }
    }
    return img.with_data(std::move(out));
}

ImageGrid neighbor_mean_rounded(const ImageGrid& img, const NeighborWeights& weights,
                                const BinGrid& bins) {
    ImageGrid means = neighbor_mean(img, weights);
    std::vector<double> out = means.data();
    for (double& v : out) {
        v = bins.center(bins.index_of(v));
    }
    return img.with_data(std::move(out));
}

Pmf1D hard_pmf_1d(const ImageGrid& img, const BinGrid& bins) {
    validate_finite(img);
    std::vector<double> probs(bins.bin_count(), 0.0);
    const double share = 1.0 / static_cast<double>(img.size());
    for (double v : img.data()) {
        probs[bins.index_of(v)] += share;
    }
    return Pmf1D{std::move(probs), bins};
}

JointPmf hard_joint_pmf(const ImageGrid& img, const BinGrid& bins, const NeighborWeights& weights) {
    const ImageGrid means = neighbor_mean(img, weights);
    const int b = bins.bin_count();
    std::vector<double> probs(static_cast<std::size_t>(b) * b, 0.0);
    const double share = 1.0 / static_cast<double>(img.size());
    const std::vector<double>& values = img.data();
    const std::vector<double>& tilde = means.data();
    for (std::size_t p = 0; p < values.size(); ++p) {
        const int i = bins.index_of(values[p]);
        const int j = bins.index_of(tilde[p]);
        probs[static_cast<std::size_t>(i) * b + j] += share;
    }
    return JointPmf{std::move(probs), bins};
}

double shannon_entropy(const Pmf1D& pmf) {
    double h = 0.0;
    for (double p : pmf.probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double spatial_entropy(const JointPmf& pmf) {
    double h = 0.0;
    for (double p : pmf.probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

}  // namespace spen::hist
