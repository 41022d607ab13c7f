#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spen {

// Every failure surfaced by the library derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};
class NonFiniteData : public Error {
public:
    using Error::Error;
};
class InvalidRange : public Error {
public:
    using Error::Error;
};
class InvalidBinCount : public Error {
public:
    using Error::Error;
};
class ImageTooSmall : public Error {
public:
    using Error::Error;
};
class DegeneratePmf : public Error {
public:
    using Error::Error;
};
class NonDifferentiableKernel : public Error {
public:
    using Error::Error;
};
class InvalidSchedule : public Error {
public:
    using Error::Error;
};
class InvalidTimestep : public Error {
public:
    using Error::Error;
};

/// Declared intensity range of an image. Values may drift slightly outside
/// during optimization; binning clamps to the grid.
struct ValueRange {
    double vmin;
    double vmax;
};

inline bool operator==(const ValueRange& a, const ValueRange& b) {
    return a.vmin == b.vmin && a.vmax == b.vmax;
}

/// Dense H x W x C grid of real intensities, row-major with interleaved
/// channels. Immutable after construction; finiteness is checked at the
/// API boundaries that consume the data, not in the constructor.
class ImageGrid {
public:
    ImageGrid(int height, int width, int channels, ValueRange range, std::vector<double> data);
    ImageGrid(int height, int width, ValueRange range, std::vector<double> data)
        : ImageGrid(height, width, 1, range, std::move(data)) {}

    static ImageGrid constant(int height, int width, double value, ValueRange range);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    const ValueRange& value_range() const { return range_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(int row, int col, int channel = 0) const {
        return (static_cast<std::size_t>(row) * width_ + col) * channels_ + channel;
    }
    double at(int row, int col, int channel = 0) const { return data_[index(row, col, channel)]; }
    const std::vector<double>& data() const { return data_; }

    /// Same shape and range, new values.
    ImageGrid with_data(std::vector<double> data) const;
    /// Copy of a single channel as its own grid.
    ImageGrid channel_plane(int channel) const;

private:
    int height_;
    int width_;
    int channels_;
    ValueRange range_;
    std::vector<double> data_;
};

/// Throws NonFiniteData if any value is NaN or infinite.
void validate_finite(const ImageGrid& img);

/// Succeeds iff the two grids share height, width, channels and value range,
/// and both hold only finite values. Throws DimensionMismatch naming the
/// differing field, or NonFiniteData.
void validate_pair(const ImageGrid& a, const ImageGrid& b);

/// Uniform grid of bin centers over (vmin, vmax):
/// center_b = vmin + (b + 0.5) * (vmax - vmin) / bin_count.
class BinGrid {
public:
    BinGrid(int bin_count, double vmin, double vmax);

    int bin_count() const { return bin_count_; }
    double vmin() const { return vmin_; }
    double vmax() const { return vmax_; }
    double delta() const { return delta_; }
    double center(int b) const { return centers_[b]; }
    const std::vector<double>& centers() const { return centers_; }

    /// Nearest-center bin index, clamped to [0, bin_count). Values exactly on
    /// a bin edge resolve to the higher bin.
    int index_of(double x) const;

    /// Clamp a value onto the span of bin centers.
    double clamp_to_centers(double x) const {
        if (x < centers_.front()) return centers_.front();
        if (x > centers_.back()) return centers_.back();
        return x;
    }

private:
    int bin_count_;
    double vmin_;
    double vmax_;
    double delta_;
    std::vector<double> centers_;
};

BinGrid make_bin_grid(int bin_count, double vmin, double vmax);

/// 256 bins over [-0.5, 255.5]: center_b == b for 8-bit integer data.
BinGrid integer_preset_bins();
/// 64 bins over [-4, 4] for standard-normal noise fields.
BinGrid noise_preset_bins();

enum class KernelFamily { box, gaussian, sigmoid_derivative };

/// Kernel family with bandwidth h and truncation radius r (in multiples of
/// h); evaluation treats K(t) = 0 for |t| > r. All families are symmetric,
/// non-negative and integrate to 1 before truncation.
struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double bandwidth = 1.0;
    double truncation_radius = 4.0;

    static KernelSpec box(double bandwidth = 1.0) { return {KernelFamily::box, bandwidth, 1.0}; }
    static KernelSpec gaussian(double bandwidth = 1.0) {
        return {KernelFamily::gaussian, bandwidth, 4.0};
    }
    static KernelSpec sigmoid_derivative(double bandwidth = 1.0) {
        return {KernelFamily::sigmoid_derivative, bandwidth, 8.0};
    }
};

void validate(const KernelSpec& kernel);

/// 3x3 neighbor-averaging stencil with a fixed zero center. Entries are
/// non-negative and sum to 1 within 1e-12.
class NeighborWeights {
public:
    explicit NeighborWeights(const std::array<double, 9>& weights,
                             std::optional<std::uint64_t> seed = std::nullopt);

    /// Each of the 8 neighbors weighted 1/8.
    static NeighborWeights uniform();

    /// Weight for offset (dr, dc), each in {-1, 0, 1}.
    double weight(int dr, int dc) const { return weights_[(dr + 1) * 3 + (dc + 1)]; }
    const std::array<double, 9>& weights() const { return weights_; }
    std::optional<std::uint64_t> seed() const { return seed_; }

private:
    std::array<double, 9> weights_;
    std::optional<std::uint64_t> seed_;
};

enum class WindowPadding { none, reflect };

/// Sliding-window configuration for local statistics. With padding none the
/// windows lie fully inside the image; with reflect the image is extended by
/// (window-1)/2 mirrored pixels per side and the origin grid covers
/// ceil(H/stride) x ceil(W/stride) positions.
struct WindowConfig {
    int window = 11;
    int stride = 11;
    WindowPadding padding = WindowPadding::none;
};

void validate(const WindowConfig& cfg, int height, int width);

/// PMF over a bin grid; entries are non-negative. Estimators normalize so the
/// entries sum to 1 within 1e-9 unless raw densities were requested.
struct Pmf1D {
    std::vector<double> probs;
    BinGrid bins;
};

/// Joint PMF over (value, neighbor-mean) tuples; probs is bin_count^2 values,
/// row-major with the pixel-value axis first: probs[i * B + j].
struct JointPmf {
    std::vector<double> probs;
    BinGrid bins;

    double at(int i, int j) const { return probs[static_cast<std::size_t>(i) * bins.bin_count() + j]; }
};

}  // namespace spen
