#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "spen/core.hpp"
#include "spen/rng.hpp"

// Deterministic image generators shared by the tests.

namespace support {

inline spen::ImageGrid uniform_image(std::uint64_t seed, int height, int width, int channels,
                                     spen::ValueRange range, double lo, double hi) {
    std::vector<double> data(static_cast<std::size_t>(height) * width * channels);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = lo + (hi - lo) * spen::rng::uniform_at(seed, i);
    }
    return spen::ImageGrid(height, width, channels, range, std::move(data));
}

/// Integer intensities 0..255 restricted to multiples of `step`, carried on
/// the 8-bit range so the 256-bin preset centers each value exactly.
inline spen::ImageGrid integer_image(std::uint64_t seed, int height, int width, int step = 1) {
    const int levels = 256 / step;
    std::vector<double> data(static_cast<std::size_t>(height) * width);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int level = static_cast<int>(spen::rng::uniform_at(seed, i) * levels);
        data[i] = static_cast<double>((level < levels ? level : levels - 1) * step);
    }
    return spen::ImageGrid(height, width, spen::ValueRange{-0.5, 255.5}, std::move(data));
}

inline double distance_to_lattice(double x, double phase, double period) {
    const double m = std::abs(std::fmod(x - phase, period));
    return std::min(m, period - m);
}

/// Uniform image redrawn until every pixel value and every 8-neighbor mean
/// (uniform stencil) sits at least `margin` away from the lattice
/// phase + k * period. Finite-difference probes near kernel truncation
/// boundaries are the reason this exists.
inline spen::ImageGrid margin_image(std::uint64_t seed, int height, int width,
                                    spen::ValueRange range, double lo, double hi, double phase,
                                    double period, double margin) {
    const spen::NeighborWeights stencil = spen::NeighborWeights::uniform();
    for (std::uint64_t attempt = 0; attempt < 100000; ++attempt) {
        spen::ImageGrid img =
            uniform_image(spen::rng::derive(seed, attempt), height, width, 1, range, lo, hi);
        bool ok = true;
        for (double v : img.data()) {
            if (distance_to_lattice(v, phase, period) < margin) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        for (int r = 0; r < height && ok; ++r) {
            for (int c = 0; c < width && ok; ++c) {
                double acc = 0.0;
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (dr == 0 && dc == 0) continue;
                        int nr = r + dr, nc = c + dc;
                        if (nr < 0) nr = -nr;
                        if (nr >= height) nr = 2 * height - 2 - nr;
                        if (nc < 0) nc = -nc;
                        if (nc >= width) nc = 2 * width - 2 - nc;
                        acc += stencil.weight(dr, dc) * img.at(nr, nc);
                    }
                }
                if (distance_to_lattice(acc, phase, period) < margin) ok = false;
            }
        }
        if (ok) return img;
    }
    throw spen::Error("margin_image: no admissible sample found");
}

}  // namespace support
