#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ptycho/array_file.hpp"
#include "ptycho/config.hpp"
#include "ptycho/images.hpp"
#include "ptycho/lens.hpp"
#include "ptycho/pipeline.hpp"
#include "ptycho/verify.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"ptycho: ptychographic phase retrieval experiments"};
    app.require_subcommand(1);

    ptycho::LensSpec lens;
    std::string lens_kind = "blr";
    fs::path lens_out = "lens.ptyc";
    auto* cmd_lens = app.add_subcommand("lens", "design a lens and write it as an array file");
    cmd_lens->add_option("--kind", lens_kind, "small or blr")->check(CLI::IsMember({"small", "blr"}));
    cmd_lens->add_option("--m", lens.m, "window side in pixels");
    cmd_lens->add_option("--r-inner", lens.r_inner, "annulus inner radius, cycles/pixel");
    cmd_lens->add_option("--r-outer", lens.r_outer, "annulus outer radius, cycles/pixel (<= 0.5)");
    cmd_lens->add_option("--focus-radius", lens.focus_radius, "BLR focus disk radius in pixels");
    cmd_lens->add_option("--iters", lens.design_iters, "BLR design iterations");
    cmd_lens->add_option("--seed", lens.seed, "BLR phase seed");
    cmd_lens->add_option("--out", lens_out, "output file");

    fs::path config_path, input_dir, out_dir;
    auto* cmd_sim = app.add_subcommand("simulate", "build scheme, lens and object; write measurements");
    cmd_sim->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
    cmd_sim->add_option("--out", out_dir, "overrides output.directory");

    auto* cmd_solve = app.add_subcommand("solve", "reconstruct from a simulation directory");
    cmd_solve->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
    cmd_solve->add_option("--input", input_dir, "directory written by simulate")->required();
    cmd_solve->add_option("--out", out_dir, "overrides output.directory");

    auto* cmd_verify = app.add_subcommand("verify", "run the built-in property suite");

    fs::path export_in, export_prefix;
    auto* cmd_export = app.add_subcommand("export", "write magnitude PGM and phase/magnitude PPM images");
    cmd_export->add_option("--input", export_in, "complex 2D array file")->required()->check(CLI::ExistingFile);
    cmd_export->add_option("--prefix", export_prefix, "output path without extension")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_lens) {
            lens.kind = ptycho::parse_lens_kind(lens_kind);
            ptycho::cli_lens(lens, lens_out, std::cout);
        } else if (*cmd_sim) {
            ptycho::ExperimentConfig cfg = ptycho::load_config(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            ptycho::cli_simulate(cfg, std::cout);
        } else if (*cmd_solve) {
            ptycho::ExperimentConfig cfg = ptycho::load_config(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            ptycho::cli_solve(cfg, input_dir, std::cout);
        } else if (*cmd_verify) {
            const auto results = ptycho::run_property_suite();
            std::cout << ptycho::format_report(results);
            for (const auto& r : results)
                if (!r.passed) return 1;
        } else if (*cmd_export) {
            ptycho::export_images(ptycho::as_complex_grid(ptycho::read_array(export_in)), export_prefix);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
