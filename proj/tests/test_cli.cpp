#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "spen/pgm.hpp"
#include "spen/rng.hpp"
#include "support.hpp"

using namespace spen;

namespace {

std::string scratch(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("spen_test_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string write_test_pgm(const std::string& name, std::uint64_t seed, int side = 16) {
    const std::string path = scratch(name);
    io::save_pgm(support::integer_image(seed, side, side), path);
    return path;
}

}  // namespace

TEST_CASE("PGM round trip preserves integer intensities") {
    const ImageGrid img = support::integer_image(5, 9, 7);
    const std::string path = scratch("roundtrip.pgm");
    io::save_pgm(img, path);
    const ImageGrid back = io::load_pgm(path);
    CHECK(back.height() == 9);
    CHECK(back.width() == 7);
    CHECK(back.channels() == 1);
    CHECK((back.value_range() == ValueRange{-0.5, 255.5}));
    CHECK(back.data() == img.data());
}

TEST_CASE("PGM writer rounds to nearest and clamps to 8 bits") {
    ImageGrid img(1, 5, ValueRange{-0.5, 255.5}, {-3.0, 0.49, 0.5, 254.6, 400.0});
    const std::string path = scratch("clamp.pgm");
    io::save_pgm(img, path);
    const ImageGrid back = io::load_pgm(path);
    CHECK((back.data() == std::vector<double>{0.0, 0.0, 1.0, 255.0, 255.0}));
}

TEST_CASE("PGM reader understands comments and rejects other formats") {
    const std::string path = scratch("commented.pgm");
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5 # binary\n# a comment line\n2 1\n255\n";
        out.put(static_cast<char>(7));
        out.put(static_cast<char>(250));
    }
    const ImageGrid img = io::load_pgm(path);
    CHECK(img.width() == 2);
    CHECK(img.at(0, 0) == 7.0);
    CHECK(img.at(0, 1) == 250.0);

    CHECK_THROWS_AS(io::load_pgm(scratch("missing.pgm")), io::FileNotFound);

    const std::string ascii = scratch("ascii.pgm");
    std::ofstream(ascii) << "P2\n1 1\n255\n0\n";
    CHECK_THROWS_AS(io::load_pgm(ascii), io::UnsupportedFormat);

    const std::string deep = scratch("deep.pgm");
    std::ofstream(deep) << "P5\n1 1\n65535\n";
    CHECK_THROWS_AS(io::load_pgm(deep), io::UnsupportedFormat);

    const std::string short_data = scratch("short.pgm");
    std::ofstream(short_data) << "P5\n4 4\n255\nxx";
    CHECK_THROWS_AS(io::load_pgm(short_data), io::UnsupportedFormat);
}

TEST_CASE("PGM writer is single-channel only") {
    ImageGrid rgbish(2, 2, 3, ValueRange{-0.5, 255.5}, std::vector<double>(12, 0.0));
    CHECK_THROWS_AS(io::save_pgm(rgbish, scratch("multi.pgm")), io::UnsupportedFormat);
}

TEST_CASE("entropy subcommand reports and echoes its configuration") {
    const std::string input = write_test_pgm("entropy_in.pgm", 71);
    const std::string report_path = scratch("entropy.json");
    const int code = cli::run({"entropy", input, "--json", report_path});
    CHECK(code == cli::exit_ok);

    const auto report = nlohmann::json::parse(slurp(report_path));
    CHECK(report["command"] == "entropy");
    CHECK(report["config"]["bins"] == 256);
    CHECK(report["config"]["kernel"] == "gaussian");
    CHECK(report["config"]["bandwidth"] == 1.0);
    REQUIRE(report["channels"].size() == 1);
    CHECK(report["channels"][0]["spatial_entropy_kde"].get<double>() > 0.0);
}

TEST_CASE("kl subcommand compares two images") {
    const std::string target = write_test_pgm("kl_target.pgm", 72);
    const std::string pred = write_test_pgm("kl_pred.pgm", 73);
    const std::string report_path = scratch("kl.json");
    const std::string csv_path = scratch("kl_windows.csv");

    const int code = cli::run({"kl", target, pred, "--window", "11", "--stride", "5", "--json",
                               report_path, "--csv", csv_path});
    CHECK(code == cli::exit_ok);

    const auto report = nlohmann::json::parse(slurp(report_path));
    CHECK(report["global"]["kl"].get<double>() > 0.0);
    CHECK(report["windowed"]["window_count"] == 4);

    // header plus one row per window
    const std::string csv = slurp(csv_path);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(csv.rfind("origin_row,origin_col,value\n", 0) == 0);

    // identical inputs give (numerically) zero divergence
    const int self = cli::run({"kl", target, target, "--global"});
    CHECK(self == cli::exit_ok);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(cli::run({}) == cli::exit_usage);
    CHECK(cli::run({"frobnicate"}) == cli::exit_usage);
    const std::string input = write_test_pgm("usage_in.pgm", 74);
    CHECK(cli::run({"entropy", input, "--kernel", "epanechnikov"}) == cli::exit_usage);
    CHECK(cli::run({"entropy", input, "--range", "nonsense"}) == cli::exit_usage);
    CHECK(cli::run({"entropy", input, "--range", "9:1"}) == cli::exit_usage);
    CHECK(cli::run({"kl", input, input, "--global", "--csv", scratch("x.csv")}) ==
          cli::exit_usage);
    // entropy is a whole-image statistic: --window is not an option there
    CHECK(cli::run({"entropy", input, "--window", "4"}) == cli::exit_usage);
    CHECK(cli::run({"kl", input, input, "--window", "4"}) == cli::exit_usage);
}

TEST_CASE("I/O errors exit with 3") {
    CHECK(cli::run({"entropy", scratch("no_such_file.pgm")}) == cli::exit_io);
    const std::string ascii = scratch("usage_ascii.pgm");
    std::ofstream(ascii) << "P2\n1 1\n255\n0\n";
    CHECK(cli::run({"entropy", ascii}) == cli::exit_io);
}

TEST_CASE("numeric degeneracy exits with 4") {
    // pixels confined to 0..16 within a range whose 8 bin centers all land on
    // odd sixteenths: a 1e-6-wide box kernel reaches none of them, and the
    // eighth-valued neighbor means miss them too
    std::vector<double> vals(64);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        vals[i] = std::min(16.0, std::floor(rng::uniform_at(75, i) * 17.0));
    }
    const std::string input = scratch("degenerate_in.pgm");
    io::save_pgm(ImageGrid(8, 8, ValueRange{-0.5, 255.5}, std::move(vals)), input);
    const int code = cli::run({"kl", input, input, "--global", "--kernel", "box", "--bandwidth",
                               "1e-06", "--bins", "8", "--range", "-0.5:16.5"});
    CHECK(code == cli::exit_numeric);
}

TEST_CASE("match subcommand descends and writes its outputs") {
    const std::string target = write_test_pgm("match_target.pgm", 76);
    const std::string init = write_test_pgm("match_init.pgm", 77);
    const std::string out = scratch("match_out.pgm");
    const std::string csv = scratch("match_curve.csv");

    const int code = cli::run({"match", target, init, "--iters", "3", "--lr", "100", "--global",
                               "--out", out, "--csv", csv});
    CHECK(code == cli::exit_ok);
    CHECK_NOTHROW(io::load_pgm(out));

    const std::string curve = slurp(csv);
    // header plus iters+1 recorded losses
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 5);
}

TEST_CASE("shuffled match runs are bit-identical for a fixed seed") {
    const std::string target = write_test_pgm("shuffle_target.pgm", 78, 12);
    const std::string init = write_test_pgm("shuffle_init.pgm", 79, 12);
    const std::string out_a = scratch("shuffle_a.pgm");
    const std::string out_b = scratch("shuffle_b.pgm");
    const std::string csv_a = scratch("shuffle_a.csv");
    const std::string csv_b = scratch("shuffle_b.csv");

    const std::vector<std::string> base = {"match", target, init,      "--iters", "2",
                                           "--lr",  "50",   "--global", "--shuffles", "2",
                                           "--seed", "123"};
    auto args_a = base;
    args_a.insert(args_a.end(), {"--out", out_a, "--csv", csv_a});
    auto args_b = base;
    args_b.insert(args_b.end(), {"--out", out_b, "--csv", csv_b});

    REQUIRE(cli::run(args_a) == cli::exit_ok);
    REQUIRE(cli::run(args_b) == cli::exit_ok);
    CHECK(slurp(csv_a) == slurp(csv_b));
    CHECK(slurp(out_a) == slurp(out_b));
}

TEST_CASE("run_match minimizes the selected objective") {
    const ImageGrid target = support::integer_image(80, 12, 12);
    const ImageGrid init = support::integer_image(81, 12, 12);

    cli::MatchOptions opts;
    opts.cfg.bins = make_bin_grid(64, -0.5, 255.5);
    opts.iterations = 25;
    const cli::MatchResult result = cli::run_match(target, init, opts);
    REQUIRE(result.losses.size() == 26);
    CHECK(result.losses.back() < result.losses.front());

    CHECK_THROWS_AS(cli::run_match(target, init, [&] {
                        cli::MatchOptions bad = opts;
                        bad.iterations = 0;
                        return bad;
                    }()),
                    InvalidRange);
    CHECK_THROWS_AS(cli::run_match(target, init, [&] {
                        cli::MatchOptions bad = opts;
                        bad.learning_rate = 0.0;
                        return bad;
                    }()),
                    InvalidRange);
}

TEST_CASE("noise-demo orders predictions by closeness to the true noise") {
    const std::string csv_path = scratch("demo.csv");
    const int code = cli::run({"noise-demo", "--size", "16", "--t", "3", "--global", "--csv",
                               csv_path});
    CHECK(code == cli::exit_ok);

    std::istringstream csv(slurp(csv_path));
    std::string line;
    REQUIRE(std::getline(csv, line));
    CHECK(line == "pred,entropy_loss,mse");
    double loss[3], mse[3];
    for (int row = 0; row < 3; ++row) {
        REQUIRE(std::getline(csv, line));
        const auto first = line.find(',');
        const auto second = line.find(',', first + 1);
        loss[row] = std::stod(line.substr(first + 1, second - first - 1));
        mse[row] = std::stod(line.substr(second + 1));
    }
    CHECK(loss[0] <= 1e-12);  // the exact noise
    CHECK(loss[0] < loss[1]);  // slightly rescaled noise
    CHECK(loss[1] < loss[2]);  // no noise at all
    CHECK(mse[0] < mse[1]);
    CHECK(mse[1] < mse[2]);
}

TEST_CASE("the installed binary answers a smoke invocation") {
    const std::string command =
        std::string(SPEN_TOOL_PATH) + " noise-demo --size 16 --t 2 --global > /dev/null 2>&1";
    CHECK(std::system(command.c_str()) == 0);
}
