#include "ptycho/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace ptycho {

namespace {

using nlohmann::json;

// Reads keys from one section and rejects anything left over.
class Section {
public:
    Section(const json& root, const std::string& name, bool required) : name_(name) {
        if (!root.contains(name)) {
            if (required) throw ValidationError(fmt::format("config: missing section '{}'", name));
            node_ = json::object();
        } else {
            node_ = root.at(name);
        }
        if (!node_.is_object()) throw ValidationError(fmt::format("config: section '{}' must be an object", name));
    }

    template <class T>
    std::optional<T> get(const std::string& key) {
        seen_.insert(key);
        if (!node_.contains(key)) return std::nullopt;
        try {
            return node_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ValidationError(fmt::format("config: {}.{} has the wrong type", name_, key));
        }
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (auto v = get<T>(key)) out = *v;
    }

    template <class T>
    T require(const std::string& key) {
        auto v = get<T>(key);
        if (!v) throw ValidationError(fmt::format("config: {}.{} is required", name_, key));
        return *v;
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!seen_.count(it.key())) throw ValidationError(fmt::format("config: unknown key {}.{}", name_, it.key()));
    }

private:
    std::string name_;
    json node_;
    std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("config: {}", e.what()));
    }
    if (!root.is_object()) throw ValidationError("config: top level must be an object");
    static const std::set<std::string> sections = {"object", "lens", "scheme", "noise", "init", "solver", "output"};
    for (auto it = root.begin(); it != root.end(); ++it)
        if (!sections.count(it.key())) throw ValidationError(fmt::format("config: unknown section '{}'", it.key()));

    ExperimentConfig cfg;
    {
        Section s(root, "object", true);
        const std::string source = s.get<std::string>("source").value_or("phantom");
        if (source == "phantom")
            cfg.object.source = ObjectSource::Phantom;
        else if (source == "file")
            cfg.object.source = ObjectSource::File;
        else
            throw ValidationError(fmt::format("config: object.source '{}' (phantom, file)", source));
        cfg.object.n = s.require<std::size_t>("n");
        if (auto p = s.get<std::string>("path")) cfg.object.path = *p;
        if (cfg.object.source == ObjectSource::File && cfg.object.path.empty())
            throw ValidationError("config: object.path is required when source is file");
        s.finish();
    }
    {
        Section s(root, "lens", true);
        cfg.lens.kind = parse_lens_kind(s.require<std::string>("kind"));
        cfg.lens.m = s.require<std::size_t>("m");
        s.read("r_inner", cfg.lens.r_inner);
        s.read("r_outer", cfg.lens.r_outer);
        s.read("focus_radius", cfg.lens.focus_radius);
        s.read("design_iters", cfg.lens.design_iters);
        cfg.lens.seed = s.require<std::uint64_t>("seed");
        s.finish();
        validate(cfg.lens);
    }
    {
        Section s(root, "scheme", true);
        cfg.scheme.n = cfg.object.n;
        cfg.scheme.m = cfg.lens.m;
        s.read("dx", cfg.scheme.dx);
        s.read("dy", cfg.scheme.dy);
        s.read("jitter", cfg.scheme.jitter);
        s.read("shear", cfg.scheme.shear);
        cfg.scheme.seed = s.require<std::uint64_t>("seed");
        s.finish();
    }
    {
        Section s(root, "noise", true);
        s.read("sigma_std", cfg.noise.sigma_std);
        cfg.noise.seed = s.require<std::uint64_t>("seed");
        if (!(cfg.noise.sigma_std >= 0.0)) throw ValidationError("config: noise.sigma_std must be non-negative");
        s.finish();
    }
    {
        Section s(root, "init", false);
        if (auto m = s.get<std::string>("method")) cfg.solver.init = parse_init(*m);
        s.read("percentile_keep", cfg.solver.percentile_keep);
        s.finish();
    }
    {
        Section s(root, "solver", true);
        if (auto a = s.get<std::string>("algorithm")) cfg.solver.algorithm = parse_algorithm(*a);
        s.read("iterations", cfg.solver.iterations);
        s.read("beta", cfg.solver.beta);
        if (auto k = s.get<std::string>("sync_kernel")) cfg.solver.sync_kernel = parse_sync_kernel(*k);
        cfg.solver.seed = s.require<std::uint64_t>("seed");
        s.read("alpha_max", cfg.solver.alpha_max);
        s.read("line_tol", cfg.solver.line_tol);
        s.read("eig_tol", cfg.solver.eig_tol);
        s.read("eig_max_iter", cfg.solver.eig_max_iter);
        s.finish();
        validate(cfg.solver);
    }
    {
        Section s(root, "output", false);
        if (auto d = s.get<std::string>("directory")) cfg.output_dir = *d;
        s.finish();
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(fmt::format("cannot open config {}", path.string()));
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

}  // namespace ptycho
