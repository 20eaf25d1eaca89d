#include "ptycho/pipeline.hpp"

#include <fmt/format.h>

#include "ptycho/array_file.hpp"
#include "ptycho/forward.hpp"

namespace ptycho {

namespace fs = std::filesystem;

LensOutcome build_lens(const LensSpec& spec) {
    if (spec.kind == LensKind::Small) return {make_small_lens(spec), std::nullopt};
    BlrLens l = make_blr_lens(spec);
    return {std::move(l.omega), l.report};
}

void cli_lens(const LensSpec& spec, const fs::path& out, std::ostream& log) {
    const LensOutcome lens = build_lens(spec);
    write_array(out, to_array(lens.omega));
    log << fmt::format("lens {} m={} written to {}\n", to_string(spec.kind), spec.m, out.string());
    if (lens.report) log << lens.report->describe() << "\n";
}

Simulation simulate(const ExperimentConfig& cfg) {
    Simulation sim;
    const LensOutcome lens = build_lens(cfg.lens);
    sim.omega = lens.omega;
    SchemeParams sp = cfg.scheme;
    sp.n = cfg.object.n;
    sp.m = cfg.lens.m;
    sim.scheme = build_scheme(sp);
    if (cfg.object.source == ObjectSource::Phantom) {
        sim.psi0 = make_phantom(cfg.object.n);
    } else {
        sim.psi0 = as_complex_grid(read_array(cfg.object.path));
        if (sim.psi0.rows != cfg.object.n || sim.psi0.cols != cfg.object.n)
            throw ValidationError(fmt::format("object file is {}x{}, config says n={}", sim.psi0.rows, sim.psi0.cols,
                                              cfg.object.n));
    }
    const ForwardModel model(sim.scheme, sim.omega);
    const MeasurementStack clean = forward_measure(model, sim.psi0);
    NoisyMeasurement noisy = add_noise(clean, cfg.noise);
    sim.a = std::move(noisy.a);
    sim.eps_sigma = noisy.eps_sigma;

    sim.report = fmt::format("n {}\nm {}\nframes {}\nsigma_std {}\neps_sigma {:.17g}\n", cfg.object.n, cfg.lens.m,
                             sim.scheme.frames(), cfg.noise.sigma_std, sim.eps_sigma);
    if (lens.report) sim.report += lens.report->describe() + "\n";
    return sim;
}

Simulation cli_simulate(const ExperimentConfig& cfg, std::ostream& log) {
    Simulation sim = simulate(cfg);
    fs::create_directories(cfg.output_dir);
    write_array(cfg.output_dir / kLensFile, to_array(sim.omega));
    write_array(cfg.output_dir / kMeasurementFile, to_array(sim.a));
    write_array(cfg.output_dir / kObjectFile, to_array(sim.psi0));
    write_array(cfg.output_dir / kPositionFile, to_array(sim.scheme.positions));
    write_atomic(cfg.output_dir / kSimulateReport, sim.report);
    log << sim.report;
    return sim;
}

std::string format_trace_csv(const ConvergenceTrace& trace, const SolverConfig& cfg) {
    std::string out = fmt::format("# algorithm={} init={} iterations={} beta={} sync_kernel={} seed={}\n",
                                  to_string(cfg.algorithm), to_string(cfg.init), cfg.iterations, cfg.beta,
                                  to_string(cfg.sync_kernel), cfg.seed);
    out += "iter,eps_a,eps_fq,eps_afq,eps_0,eps_delta\n";
    auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); };
    for (const MetricRow& r : trace.rows)
        out += fmt::format("{},{:.17g},{:.17g},{:.17g},{},{}\n", r.iter, r.eps_a, r.eps_fq, r.eps_afq, cell(r.eps_0),
                           cell(r.eps_delta));
    return out;
}

SolveResult cli_solve(const ExperimentConfig& cfg, const fs::path& input_dir, std::ostream& log) {
    for (const char* name : {kLensFile, kPositionFile, kMeasurementFile})
        if (!fs::exists(input_dir / name))
            throw ValidationError(fmt::format("missing input {}", (input_dir / name).string()));
    const ComplexGrid omega = as_complex_grid(read_array(input_dir / kLensFile));
    const std::vector<Position> positions = as_positions(read_array(input_dir / kPositionFile));
    const MeasurementStack a = as_measurements(read_array(input_dir / kMeasurementFile));
    if (omega.rows != omega.cols) throw ValidationError("lens must be square");
    if (omega.rows != cfg.lens.m || a.side != cfg.lens.m)
        throw ValidationError(fmt::format("frame side mismatch: config m={}, lens {}, measurements {}", cfg.lens.m,
                                          omega.rows, a.side));
    if (positions.size() != a.frames)
        throw ValidationError(
            fmt::format("frame count mismatch: {} positions, {} measured frames", positions.size(), a.frames));

    IlluminationScheme scheme{cfg.object.n, cfg.lens.m, positions};
    const SchemeReport rep = validate_scheme(scheme);
    if (!rep.ok()) throw ValidationError(rep.describe());
    const ForwardModel model(scheme, omega);

    std::optional<ComplexGrid> psi0;
    if (fs::exists(input_dir / kObjectFile)) {
        psi0 = as_complex_grid(read_array(input_dir / kObjectFile));
        if (psi0->rows != cfg.object.n || psi0->cols != cfg.object.n)
            throw ValidationError(fmt::format("object size mismatch: config n={}, file {}x{}", cfg.object.n,
                                              psi0->rows, psi0->cols));
    }

    SolveResult res = run(cfg.solver, model, a, psi0 ? &*psi0 : nullptr);
    fs::create_directories(cfg.output_dir);
    write_array(cfg.output_dir / kReconstructionFile, to_array(res.psi));
    write_atomic(cfg.output_dir / kTraceFile, format_trace_csv(res.trace, cfg.solver));
    if (res.init_eig)
        log << fmt::format("init eigensolve: eigenvalue {:.12g}, {} iterations, residual {:.3e}{}\n",
                           res.init_eig->eigenvalue, res.init_eig->iterations, res.init_eig->residual,
                           res.init_eig->converged ? "" : " (not converged)");
    const MetricRow& last = res.trace.rows.back();
    log << fmt::format("{} + {}: {} iterations, eps_a {:.3e}, eps_fq {:.3e}", to_string(cfg.solver.init),
                       to_string(cfg.solver.algorithm), last.iter, last.eps_a, last.eps_fq);
    if (last.eps_0) log << fmt::format(", eps_0 {:.3e}", *last.eps_0);
    log << "\n";
    return res;
}

}  // namespace ptycho
