#include "spen/pgm.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace spen::io {

namespace {

// Next whitespace-separated token, skipping '#' comments through end of line.
std::string next_token(std::istream& in) {
    std::string token;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) continue;
        token.push_back(static_cast<char>(c));
        while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
            token.push_back(static_cast<char>(in.get()));
        }
        return token;
    }
    throw UnsupportedFormat("truncated header");
}

int parse_header_int(std::istream& in, const char* what) {
    const std::string token = next_token(in);
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size() || value <= 0) throw std::invalid_argument(what);
        return value;
    } catch (const std::exception&) {
        throw UnsupportedFormat(std::string("invalid ") + what + " field: '" + token + "'");
    }
}

}  // namespace

ImageGrid load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FileNotFound("cannot open '" + path + "'");
    }
    std::string magic = next_token(in);
    if (magic != "P5") {
        throw UnsupportedFormat("expected binary PGM (P5), got magic '" + magic + "'");
    }
    const int width = parse_header_int(in, "width");
    const int height = parse_header_int(in, "height");
    const int maxval = parse_header_int(in, "maxval");
    if (maxval > 255) {
        throw UnsupportedFormat("only 8-bit PGM is supported, maxval " + std::to_string(maxval));
    }
    in.get();  // single whitespace byte after the header

    const std::size_t count = static_cast<std::size_t>(width) * height;
    std::vector<unsigned char> bytes(count);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
        throw UnsupportedFormat("pixel data shorter than header promises");
    }
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = static_cast<double>(bytes[i]);
    }
    return ImageGrid(height, width, 1, ValueRange{-0.5, 255.5}, std::move(data));
}

void save_pgm(const ImageGrid& img, const std::string& path) {
    if (img.channels() != 1) {
        throw UnsupportedFormat("PGM output is single-channel, image has " +
                                std::to_string(img.channels()));
    }
    validate_finite(img);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw WriteFailure("cannot open '" + tmp + "' for writing");
        }
        out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
        std::vector<unsigned char> bytes(img.size());
        const std::vector<double>& data = img.data();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double v = std::floor(data[i] + 0.5);
            bytes[i] = static_cast<unsigned char>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw WriteFailure("short write to '" + tmp + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw WriteFailure("cannot move temporary onto '" + path + "': " + ec.message());
    }
}

}  // namespace spen::io
