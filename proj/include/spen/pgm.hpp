#pragma once

#include <string>

#include "spen/core.hpp"

namespace spen::io {

class FileNotFound : public Error {
public:
    using Error::Error;
};
class UnsupportedFormat : public Error {
public:
    using Error::Error;
};
class WriteFailure : public Error {
public:
    using Error::Error;
};

/// Reads a binary 8-bit PGM (magic P5, maxval <= 255). The grid carries the
/// value range [-0.5, 255.5] so the 256-bin preset centers land on the
/// integer intensities.
ImageGrid load_pgm(const std::string& path);

/// Writes a single-channel grid as binary 8-bit PGM, rounding and clamping
/// values to [0, 255]. The file appears atomically: data goes to a temporary
/// sibling that is renamed over the destination.
void save_pgm(const ImageGrid& img, const std::string& path);

}  // namespace spen::io
