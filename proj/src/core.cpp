#include "spen/core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace spen {

ImageGrid::ImageGrid(int height, int width, int channels, ValueRange range, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), range_(range), data_(std::move(data)) {
    if (height_ < 1 || width_ < 1 || channels_ < 1) {
        throw DimensionMismatch("ImageGrid: height, width and channels must be positive");
    }
    const auto expected = static_cast<std::size_t>(height_) * width_ * channels_;
    if (data_.size() != expected) {
        throw DimensionMismatch("ImageGrid: data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(height_) + "x" +
                                std::to_string(width_) + "x" + std::to_string(channels_));
    }
    if (!(range_.vmin < range_.vmax)) {
        throw InvalidRange("ImageGrid: value range requires vmin < vmax");
    }
}

ImageGrid ImageGrid::constant(int height, int width, double value, ValueRange range) {
    return ImageGrid(height, width, 1, range,
                     std::vector<double>(static_cast<std::size_t>(height) * width, value));
}

ImageGrid ImageGrid::with_data(std::vector<double> data) const {
    return ImageGrid(height_, width_, channels_, range_, std::move(data));
}

ImageGrid ImageGrid::channel_plane(int channel) const {
    if (channel < 0 || channel >= channels_) {
        throw DimensionMismatch("ImageGrid: channel out of range");
    }
    std::vector<double> plane(static_cast<std::size_t>(height_) * width_);
    for (int r = 0; r < height_; ++r) {
        for (int c = 0; c < width_; ++c) {
            plane[static_cast<std::size_t>(r) * width_ + c] = at(r, c, channel);
        }
    }
    return ImageGrid(height_, width_, 1, range_, std::move(plane));
}

void validate_finite(const ImageGrid& img) {
    for (double v : img.data()) {
        if (!std::isfinite(v)) {
            throw NonFiniteData("image contains a NaN or infinite value");
        }
    }
}

void validate_pair(const ImageGrid& a, const ImageGrid& b) {
    if (a.height() != b.height()) {
        throw DimensionMismatch("height differs: " + std::to_string(a.height()) + " vs " +
                                std::to_string(b.height()));
    }
    if (a.width() != b.width()) {
        throw DimensionMismatch("width differs: " + std::to_string(a.width()) + " vs " +
                                std::to_string(b.width()));
    }
    if (a.channels() != b.channels()) {
        throw DimensionMismatch("channels differ: " + std::to_string(a.channels()) + " vs " +
                                std::to_string(b.channels()));
    }
    if (!(a.value_range() == b.value_range())) {
        throw DimensionMismatch("value range differs");
    }
    validate_finite(a);
    validate_finite(b);
}

BinGrid::BinGrid(int bin_count, double vmin, double vmax)
    : bin_count_(bin_count), vmin_(vmin), vmax_(vmax) {
    if (bin_count_ < 2) {
        throw InvalidBinCount("bin grid requires at least 2 bins, got " + std::to_string(bin_count_));
    }
    if (!std::isfinite(vmin_) || !std::isfinite(vmax_) || !(vmin_ < vmax_)) {
        throw InvalidRange("bin grid requires finite vmin < vmax");
    }
    delta_ = (vmax_ - vmin_) / bin_count_;
    centers_.resize(bin_count_);
    for (int b = 0; b < bin_count_; ++b) {
        centers_[b] = vmin_ + (b + 0.5) * delta_;
    }
}

int BinGrid::index_of(double x) const {
    const int b = static_cast<int>(std::floor((x - vmin_) / delta_));
    if (b < 0) return 0;
    if (b >= bin_count_) return bin_count_ - 1;
    return b;
}

BinGrid make_bin_grid(int bin_count, double vmin, double vmax) {
    return BinGrid(bin_count, vmin, vmax);
}

BinGrid integer_preset_bins() { return BinGrid(256, -0.5, 255.5); }

BinGrid noise_preset_bins() { return BinGrid(64, -4.0, 4.0); }

void validate(const KernelSpec& kernel) {
    if (!(kernel.bandwidth > 0.0) || !std::isfinite(kernel.bandwidth)) {
        throw InvalidRange("kernel bandwidth must be positive and finite");
    }
    if (!(kernel.truncation_radius > 0.0)) {
        throw InvalidRange("kernel truncation radius must be positive");
    }
}

NeighborWeights::NeighborWeights(const std::array<double, 9>& weights,
                                 std::optional<std::uint64_t> seed)
    : weights_(weights), seed_(seed) {
    if (weights_[4] != 0.0) {
        throw InvalidRange("neighbor stencil requires a zero center weight");
    }
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InvalidRange("neighbor stencil weights must be non-negative and finite");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw InvalidRange("neighbor stencil weights must sum to 1");
    }
}

NeighborWeights NeighborWeights::uniform() {
    std::array<double, 9> w;
    w.fill(0.125);
    w[4] = 0.0;
    return NeighborWeights(w);
}

void validate(const WindowConfig& cfg, int height, int width) {
    if (cfg.window < 3 || cfg.window % 2 == 0) {
        throw InvalidRange("window size must be odd and at least 3");
    }
    if (cfg.stride < 1) {
        throw InvalidRange("window stride must be at least 1");
    }
    if (cfg.padding == WindowPadding::none && (cfg.window > height || cfg.window > width)) {
        throw ImageTooSmall("window " + std::to_string(cfg.window) + " does not fit in " +
                            std::to_string(height) + "x" + std::to_string(width) +
                            " without padding");
    }
    // Mirroring folds across each edge once, so the padding cannot exceed the
    // image extent.
    if (cfg.padding == WindowPadding::reflect &&
        (cfg.window - 1) / 2 > std::min(height, width) - 1) {
        throw ImageTooSmall("reflect padding for window " + std::to_string(cfg.window) +
                            " exceeds a " + std::to_string(height) + "x" + std::to_string(width) +
                            " image");
    }
}

}  // namespace spen
