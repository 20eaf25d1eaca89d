#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "ptycho/core.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/lens.hpp"
#include "ptycho/solvers.hpp"

namespace ptycho {

enum class ObjectSource { Phantom, File };

struct ObjectConfig {
    ObjectSource source = ObjectSource::Phantom;
    std::size_t n = 64;
    std::filesystem::path path;  // ArrayFile, source = file only
};

/// One experiment. JSON sections: object, lens, scheme, noise, init, solver,
/// output. Unknown keys are rejected and every seed must be given.
struct ExperimentConfig {
    ObjectConfig object;
    LensSpec lens;
    SchemeParams scheme;  // n and m are filled from object and lens
    NoiseSpec noise;
    SolverConfig solver;
    std::filesystem::path output_dir = ".";
};

/// Throws ValidationError naming the offending key.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace ptycho
