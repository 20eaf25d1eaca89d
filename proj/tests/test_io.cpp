#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ptycho/array_file.hpp"
#include "ptycho/config.hpp"
#include "ptycho/images.hpp"
#include "ptycho/pipeline.hpp"
#include "ptycho/vecops.hpp"
#include "support.hpp"

using namespace ptycho;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ptycho_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const char* kSmallConfig = R"({
  "object": {"source": "phantom", "n": 32},
  "lens": {"kind": "blr", "m": 8, "r_inner": 0.1, "r_outer": 0.45, "focus_radius": 2.5, "design_iters": 50, "seed": 4},
  "scheme": {"dx": 3, "dy": 3, "jitter": 0.4, "shear": true, "seed": 5},
  "noise": {"sigma_std": 0, "seed": 6},
  "init": {"method": "tps", "percentile_keep": 0.8},
  "solver": {"algorithm": "raar", "iterations": 15, "beta": 0.9, "sync_kernel": "K", "seed": 7}
})";

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("array files round trip bit for bit") {
    const ComplexGrid g = test::random_grid(5, 7, 1);
    const ArrayFile f = to_array(g);
    CHECK(f.dtype == DType::Complex);
    CHECK(f.dims == std::vector<std::uint64_t>{5, 7});
    const std::string bytes = encode_array(f);
    CHECK(bytes.substr(0, 4) == "PTYC");
    CHECK(bytes.size() == 4 + 1 + 1 + 1 + 2 * 8 + 5 * 7 * 16);
    CHECK(decode_array(bytes) == f);
    CHECK(as_complex_grid(decode_array(bytes)) == g);

    MeasurementStack a(3, 4);
    for (std::size_t p = 0; p < a.size(); ++p) a.data[p] = 0.1 * static_cast<double>(p);
    CHECK(as_measurements(decode_array(encode_array(to_array(a)))) == a);

    const std::vector<Position> pos{{1.5, 2.0}, {0.0, 3.25}};
    const ArrayFile pf = to_array(pos);
    CHECK(pf.dims == std::vector<std::uint64_t>{2, 2});
    CHECK(pf.payload[0] == 1.5);
    CHECK(pf.payload[1] == 2.0);
    CHECK(as_positions(decode_array(encode_array(pf))) == pos);

    const fs::path dir = scratch("array");
    write_array(dir / "g.ptyc", f);
    CHECK(read_array(dir / "g.ptyc") == f);
    CHECK_FALSE(fs::exists(dir / "g.ptyc.tmp"));
}

TEST_CASE("array decoding rejects malformed input") {
    std::string bytes = encode_array(to_array(test::random_grid(2, 2, 2)));
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_array(bad), FormatError);
    bad = bytes;
    bad[4] = 9;  // version
    CHECK_THROWS_AS(decode_array(bad), FormatError);
    bad = bytes;
    bad[5] = 3;  // dtype
    CHECK_THROWS_AS(decode_array(bad), FormatError);
    CHECK_THROWS_AS(decode_array(bytes.substr(0, bytes.size() - 1)), FormatError);
    CHECK_THROWS_AS(decode_array(bytes + "x"), FormatError);
    CHECK_THROWS_AS(decode_array(""), FormatError);
    CHECK_THROWS_AS(as_measurements(to_array(test::random_grid(2, 2, 3))), FormatError);
}

TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config(kSmallConfig);
    CHECK(c.object.n == 32);
    CHECK(c.lens.kind == LensKind::BLR);
    CHECK(c.lens.m == 8);
    CHECK(c.scheme.n == 32);
    CHECK(c.scheme.m == 8);
    CHECK(c.scheme.shear);
    CHECK(c.solver.algorithm == Algorithm::RAAR);
    CHECK(c.solver.init == InitMethod::TPS);
    CHECK(c.solver.seed == 7);

    std::string unknown = kSmallConfig;
    unknown.replace(unknown.find("\"beta\""), 6, "\"betta\"");
    CHECK_THROWS_WITH_AS(parse_config(unknown), doctest::Contains("solver.betta"), ValidationError);

    std::string noseed = kSmallConfig;
    noseed.replace(noseed.find(", \"seed\": 6"), 11, "");
    CHECK_THROWS_WITH_AS(parse_config(noseed), doctest::Contains("noise.seed"), ValidationError);

    CHECK_THROWS_AS(parse_config("{"), ValidationError);
    CHECK_THROWS_AS(parse_config("[]"), ValidationError);
    std::string extra = kSmallConfig;
    extra.insert(1, "\"plot\": {},");
    CHECK_THROWS_AS(parse_config(extra), ValidationError);
    std::string badalg = kSmallConfig;
    badalg.replace(badalg.find("\"raar\""), 6, "\"adam\"");
    CHECK_THROWS_AS(parse_config(badalg), ValidationError);
}

TEST_CASE("PGM and PPM encoding") {
    const std::string ones = encode_pgm(test::constant_grid(3, {1.0, 0.0}));
    const PnmHeader h = parse_pnm_header(ones);
    CHECK(h.magic == "P5");
    CHECK(h.width == 3);
    CHECK(h.height == 3);
    CHECK(h.maxval == 255);
    REQUIRE(ones.size() == h.data_offset + 9);
    for (std::size_t k = h.data_offset; k < ones.size(); ++k) CHECK(static_cast<unsigned char>(ones[k]) == 255);

    const std::string zeros = encode_pgm(ComplexGrid(2, 4));
    const PnmHeader hz = parse_pnm_header(zeros);
    CHECK(hz.width == 4);
    CHECK(hz.height == 2);
    for (std::size_t k = hz.data_offset; k < zeros.size(); ++k) CHECK(zeros[k] == 0);

    const std::string ppm = encode_ppm(test::random_grid(4, 5, 4));
    const PnmHeader hp = parse_pnm_header(ppm);
    CHECK(hp.magic == "P6");
    CHECK(ppm.size() == hp.data_offset + 60);

    CHECK(hsv_to_rgb(0.0, 1.0, 1.0) == std::array<std::uint8_t, 3>{255, 0, 0});
    CHECK(hsv_to_rgb(1.0 / 3.0, 1.0, 1.0) == std::array<std::uint8_t, 3>{0, 255, 0});
    CHECK(hsv_to_rgb(2.0 / 3.0, 1.0, 1.0) == std::array<std::uint8_t, 3>{0, 0, 255});
    CHECK(hsv_to_rgb(0.5, 0.0, 0.0) == std::array<std::uint8_t, 3>{0, 0, 0});
    CHECK_THROWS_AS(parse_pnm_header("P3\n1 1\n255\n"), FormatError);

    ComplexGrid nan(2, 2);
    nan(1, 1) = std::nan("");
    CHECK_THROWS_AS(export_images(nan, scratch("img") / "x"), ValidationError);
}

TEST_CASE("trace CSV layout") {
    ConvergenceTrace t;
    t.rows.push_back({0, 0.5, 0.25, 0.125, 0.1, 0.2});
    t.rows.push_back({1, 0.4, 0.2, 0.1, std::nullopt, std::nullopt});
    SolverConfig cfg;
    cfg.beta = 0.75;
    const std::string csv = format_trace_csv(t, cfg);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line.rfind("# ", 0) == 0);
    CHECK(line.find("beta=0.75") != std::string::npos);
    CHECK(line.find("algorithm=ap") != std::string::npos);
    std::getline(is, line);
    CHECK(line == "iter,eps_a,eps_fq,eps_afq,eps_0,eps_delta");
    std::getline(is, line);
    CHECK(line == "0,0.5,0.25,0.125,0.10000000000000001,0.20000000000000001");
    std::getline(is, line);
    CHECK(line == "1,0.40000000000000002,0.20000000000000001,0.10000000000000001,,");
    CHECK_FALSE(std::getline(is, line));
}

TEST_CASE("simulate and solve through the file layer") {
    ExperimentConfig cfg = parse_config(kSmallConfig);
    const fs::path sim = scratch("sim"), sol = scratch("sol");
    cfg.output_dir = sim;
    std::ostringstream log;
    const Simulation s = cli_simulate(cfg, log);
    for (const char* f : {kLensFile, kMeasurementFile, kObjectFile, kPositionFile, kSimulateReport})
        CHECK(fs::exists(sim / f));

    // The stored object and lens reproduce the stored measurements.
    const ComplexGrid psi0 = as_complex_grid(read_array(sim / kObjectFile));
    const ComplexGrid omega = as_complex_grid(read_array(sim / kLensFile));
    const IlluminationScheme scheme{32, 8, as_positions(read_array(sim / kPositionFile))};
    const MeasurementStack a = forward_measure(ForwardModel(scheme, omega), psi0);
    const MeasurementStack stored = as_measurements(read_array(sim / kMeasurementFile));
    double worst = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) worst = std::max(worst, std::abs(a.data[p] - stored.data[p]));
    CHECK(worst < 1e-12);
    CHECK(s.eps_sigma == 0.0);

    cfg.output_dir = sol;
    const SolveResult r = cli_solve(cfg, sim, log);
    CHECK(fs::exists(sol / kReconstructionFile));
    CHECK(as_complex_grid(read_array(sol / kReconstructionFile)) == r.psi);
    const std::string csv = slurp(sol / kTraceFile);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 16);

    ExperimentConfig wrong = cfg;
    wrong.lens.m = 16;
    CHECK_THROWS_AS(cli_solve(wrong, sim, log), ValidationError);
    CHECK_THROWS_AS(cli_solve(cfg, scratch("empty"), log), ValidationError);
}

TEST_CASE("noisy simulation reports the realized noise level") {
    ExperimentConfig cfg = parse_config(kSmallConfig);
    cfg.noise.sigma_std = 0.05;
    const Simulation s = simulate(cfg);
    CHECK(s.eps_sigma > 0.0);
    CHECK(s.eps_sigma < 1.0);
    const Simulation again = simulate(cfg);
    CHECK(again.a == s.a);
}
