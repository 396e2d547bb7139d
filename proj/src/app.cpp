#include "slr/app.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "slr/errors.hpp"
#include "slr/io.hpp"

namespace slr {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const json& field(const json& j, const char* name, const std::string& where) {
    if (!j.is_object() || !j.contains(name)) {
        throw ParseError("missing field '" + std::string(name) + "' in " + where);
    }
    return j.at(name);
}

template <class T>
T get(const json& j, const char* name, const std::string& where) {
    try {
        return field(j, name, where).get<T>();
    } catch (const json::exception& e) {
        throw ParseError("field '" + std::string(name) + "' in " + where + ": " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* name, T fallback, const std::string& where) {
    if (!j.is_object() || !j.contains(name)) return fallback;
    return get<T>(j, name, where);
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

Shape parse_shape(const json& j, std::size_t index) {
    const std::string where = "shapes[" + std::to_string(index) + "]";
    Shape s;
    const auto type = get<std::string>(j, "type", where);
    if (type == "rect") {
        s.region = Rect{get<double>(j, "x0", where), get<double>(j, "y0", where), get<double>(j, "x1", where),
                        get<double>(j, "y1", where)};
    } else if (type == "disk") {
        s.region = Disk{get<double>(j, "cx", where), get<double>(j, "cy", where), get<double>(j, "radius", where)};
    } else {
        throw ParseError("unknown shape type '" + type + "' in " + where);
    }
    s.amplitude = get<double>(j, "amplitude", where);
    const auto profile = get_or<std::string>(j, "profile", "constant", where);
    if (profile == "linear") {
        s.linear = LinearProfile{get<double>(j, "gx", where), get<double>(j, "gy", where)};
    } else if (profile != "constant") {
        throw ParseError("unknown profile '" + profile + "' in " + where);
    }
    return s;
}

FilterSupport parse_support(const json& j, const char* name, FilterSupport fallback) {
    if (!j.contains(name)) return fallback;
    const json& f = j.at(name);
    try {
        if (f.is_number_integer()) return FilterSupport(f.get<int>(), f.get<int>());
        if (f.is_array() && f.size() == 2) return FilterSupport(f[0].get<int>(), f[1].get<int>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("field '") + name + "': " + e.what());
    }
    throw ParseError(std::string("field '") + name + "' must be an odd integer or [rows, cols]");
}

void write_image_outputs(const fs::path& dir, const std::string& stem, const ComplexImage& img, const RunConfig& cfg,
                         json& png_ranges) {
    if (cfg.export_raw) write_array(dir / (stem + ".slr"), img);
    if (cfg.export_png) {
        const PngRange r = write_png(dir / (stem + ".png"), img);
        png_ranges[stem] = {{"min", r.min}, {"max", r.max}};
    }
}

json write_mode_outputs(const Problem& problem, const RunConfig& cfg, Mode mode, const SolverConfig& solver) {
    const Recovery rec = irls_recover(problem.samp, solver);
    const fs::path dir = cfg.output_dir / to_string(mode);
    fs::create_directories(dir);
    json png = json::object();
    const ComplexImage image = rec.image();
    write_image_outputs(dir, "rho", image, cfg, png);
    write_image_outputs(dir, "rho1", rec.rho1, cfg, png);
    write_image_outputs(dir, "rho2", rec.rho2, cfg, png);
    if (problem.truth) {
        ComplexImage err(image.grid(), Domain::spatial);
        for (std::size_t i = 0; i < err.grid().size(); ++i) err[i] = std::abs((*problem.truth)[i] - image[i]);
        write_image_outputs(dir, "error", err, cfg, png);
    }
    json out = recovery_to_json(rec, problem, solver);
    if (cfg.export_png) out["png"] = png;
    return out;
}

}  // namespace

json load_json(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

void save_json(const fs::path& path, const json& j) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << j.dump(2) << '\n';
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

PhantomJob parse_phantom_job(const json& j, const fs::path& base) {
    const std::string where = "phantom spec";
    const KGrid grid(get<int>(j, "rows", where), get<int>(j, "cols", where));
    const auto seed = get_or<std::uint64_t>(j, "seed", 0, where);
    PhantomJob job{PhantomSpec{grid, {}, seed}, resolve(base, get<std::string>(j, "output_dir", where))};
    if (j.contains("shapes")) {
        const json& shapes = j.at("shapes");
        if (!shapes.is_array()) throw ParseError("field 'shapes' in phantom spec must be an array");
        for (std::size_t i = 0; i < shapes.size(); ++i) job.spec.shapes.push_back(parse_shape(shapes[i], i));
    } else if (j.contains("random_shapes")) {
        job.spec = random_phantom_spec(grid, get<int>(j, "random_shapes", where), seed);
    } else if (j.contains("preset")) {
        const auto preset = get<std::string>(j, "preset", where);
        if (preset != "mixed") throw ParseError("unknown preset '" + preset + "' in phantom spec");
        job.spec = mixed_phantom_spec(grid);
        job.spec.seed = seed;
    } else {
        throw ParseError("missing field 'shapes' in phantom spec");
    }
    return job;
}

MaskJob parse_mask_job(const json& j, const fs::path& base) {
    const std::string where = "mask spec";
    MaskSpec spec{KGrid(get<int>(j, "rows", where), get<int>(j, "cols", where))};
    spec.acceleration = get<double>(j, "acceleration", where);
    spec.density_decay = get_or<double>(j, "density_decay", spec.density_decay, where);
    spec.center_radius = get_or<int>(j, "center_radius", spec.center_radius, where);
    spec.seed = get_or<std::uint64_t>(j, "seed", 0, where);
    return {spec, resolve(base, get<std::string>(j, "output_dir", where))};
}

SolverConfig parse_solver_config(const json& j) {
    const std::string where = "solver config";
    SolverConfig c;
    if (j.is_null()) return c;
    if (!j.is_object()) throw ParseError("solver config must be an object");
    c.lambda1 = get_or(j, "lambda1", c.lambda1, where);
    c.lambda2 = get_or(j, "lambda2", c.lambda2, where);
    c.p = get_or(j, "p", c.p, where);
    c.gamma1 = get_or(j, "gamma1", c.gamma1, where);
    c.gamma2 = get_or(j, "gamma2", c.gamma2, where);
    c.filter1 = parse_support(j, "filter1", c.filter1);
    c.filter2 = parse_support(j, "filter2", c.filter2);
    c.irls_iters = get_or(j, "irls_iters", c.irls_iters, where);
    c.admm_iters = get_or(j, "admm_iters", c.admm_iters, where);
    c.epsilon0 = get_or(j, "epsilon0", c.epsilon0, where);
    c.epsilon_rel = get_or(j, "epsilon_rel", c.epsilon_rel, where);
    c.epsilon_decay = get_or(j, "epsilon_decay", c.epsilon_decay, where);
    c.epsilon_min = get_or(j, "epsilon_min", c.epsilon_min, where);
    c.rho_update = parse_rho_update(get_or<std::string>(j, "rho_update", to_string(c.rho_update), where));
    if (j.contains("mode")) c.mode = parse_mode(get<std::string>(j, "mode", where));
    return c;
}

json solver_config_to_json(const SolverConfig& c) {
    return {{"mode", to_string(c.mode)},
            {"lambda1", c.lambda1},
            {"lambda2", c.lambda2},
            {"p", c.p},
            {"gamma1", c.gamma1},
            {"gamma2", c.gamma2},
            {"filter1", {c.filter1.rows(), c.filter1.cols()}},
            {"filter2", {c.filter2.rows(), c.filter2.cols()}},
            {"irls_iters", c.irls_iters},
            {"admm_iters", c.admm_iters},
            {"epsilon0", c.epsilon0},
            {"epsilon_rel", c.epsilon_rel},
            {"epsilon_decay", c.epsilon_decay},
            {"epsilon_min", c.epsilon_min},
            {"rho_update", to_string(c.rho_update)}};
}

RunConfig parse_run_config(const json& j, const fs::path& base) {
    const std::string where = "run config";
    RunConfig c;
    if (j.contains("modes")) {
        for (const auto& m : get<std::vector<std::string>>(j, "modes", where)) c.modes.push_back(parse_mode(m));
        if (c.modes.empty()) throw ParseError("field 'modes' in run config is empty");
    } else {
        c.modes.push_back(parse_mode(get<std::string>(j, "mode", where)));
    }
    if (j.contains("truth")) c.truth = resolve(base, get<std::string>(j, "truth", where));
    if (j.contains("truth_rho1")) c.truth_rho1 = resolve(base, get<std::string>(j, "truth_rho1", where));
    if (j.contains("truth_rho2")) c.truth_rho2 = resolve(base, get<std::string>(j, "truth_rho2", where));
    if (j.contains("kspace")) c.kspace = resolve(base, get<std::string>(j, "kspace", where));
    if (!c.truth && !c.kspace) throw ParseError("missing field 'truth' or 'kspace' in run config");
    c.mask = resolve(base, get<std::string>(j, "mask", where));
    c.noise_sigma = get_or(j, "noise_sigma", 0.0, where);
    c.noise_seed = get_or<std::uint64_t>(j, "noise_seed", 0, where);
    c.solver = parse_solver_config(j.contains("solver") ? j.at("solver") : json());
    c.output_dir = resolve(base, get<std::string>(j, "output_dir", where));
    if (j.contains("export")) {
        c.export_raw = false;
        for (const auto& e : get<std::vector<std::string>>(j, "export", where)) {
            if (e == "raw") {
                c.export_raw = true;
            } else if (e == "png") {
                c.export_png = true;
            } else {
                throw ParseError("unknown export format '" + e + "'");
            }
        }
    }
    return c;
}

json run_phantom(const PhantomJob& job) {
    const Phantom ph = make_phantom(job.spec);
    fs::create_directories(job.output_dir);
    write_array(job.output_dir / "rho.slr", ph.rho);
    write_array(job.output_dir / "rho1.slr", ph.rho1);
    write_array(job.output_dir / "rho2.slr", ph.rho2);
    write_array(job.output_dir / "kspace.slr", fft2_centered(ph.rho));
    json manifest = {{"schema", "slr-phantom/1"},
                     {"rows", job.spec.grid.rows()},
                     {"cols", job.spec.grid.cols()},
                     {"seed", job.spec.seed},
                     {"shapes", job.spec.shapes.size()},
                     {"files", {"rho.slr", "rho1.slr", "rho2.slr", "kspace.slr"}}};
    save_json(job.output_dir / "phantom_manifest.json", manifest);
    return manifest;
}

json run_mask(const MaskJob& job) {
    const SamplingMask mask = make_mask(job.spec);
    fs::create_directories(job.output_dir);
    write_mask(job.output_dir / "mask.slr", mask);
    json manifest = {{"schema", "slr-mask/1"},
                     {"rows", job.spec.grid.rows()},
                     {"cols", job.spec.grid.cols()},
                     {"acceleration", job.spec.acceleration},
                     {"density_decay", job.spec.density_decay},
                     {"center_radius", job.spec.center_radius},
                     {"seed", job.spec.seed},
                     {"requested_fraction", 1.0 / job.spec.acceleration},
                     {"achieved_fraction", mask.fraction()},
                     {"samples", mask.count()},
                     {"files", {"mask.slr"}}};
    save_json(job.output_dir / "mask_manifest.json", manifest);
    return manifest;
}

Problem load_problem(const RunConfig& cfg) {
    const SamplingMask mask = read_mask(cfg.mask);
    std::optional<ComplexImage> truth, t1, t2;
    auto read_spatial = [&](const fs::path& p) {
        ComplexImage img = read_array(p);
        if (img.domain() != Domain::spatial) throw ParseError("'" + p.string() + "' is not a spatial image");
        if (!(img.grid() == mask.grid)) throw DimensionError("grid of '" + p.string() + "' does not match the mask");
        return img;
    };
    if (cfg.truth) truth = read_spatial(*cfg.truth);
    if (cfg.truth_rho1) t1 = read_spatial(*cfg.truth_rho1);
    if (cfg.truth_rho2) t2 = read_spatial(*cfg.truth_rho2);
    ComplexImage kspace = [&] {
        if (cfg.kspace) {
            ComplexImage k = read_array(*cfg.kspace);
            if (k.domain() != Domain::fourier) throw ParseError("'" + cfg.kspace->string() + "' is not k-space");
            if (!(k.grid() == mask.grid)) {
                throw DimensionError("grid of '" + cfg.kspace->string() + "' does not match the mask");
            }
            return k;
        }
        return fft2_centered(*truth);
    }();
    const SamplingOp clean = SamplingOp::from_kspace(mask, kspace);
    CVector b = add_noise(clean.measurements(), cfg.noise_sigma, cfg.noise_seed);
    return Problem{SamplingOp(mask, std::move(b), cfg.noise_sigma), std::move(truth), std::move(t1), std::move(t2)};
}

SolverConfig solver_for_mode(const SolverConfig& base, Mode mode) {
    SolverConfig c = base;
    c.mode = mode;
    return c;
}

json recovery_to_json(const Recovery& rec, const Problem& problem, const SolverConfig& cfg) {
    json iters = json::array();
    for (const auto& r : rec.diagnostics.iterations) {
        iters.push_back({{"iteration", r.iteration},
                         {"epsilon1", r.epsilon1},
                         {"epsilon2", r.epsilon2},
                         {"surrogate_before", r.surrogate_before},
                         {"surrogate_after", r.surrogate_after},
                         {"objective_before", r.objective_before},
                         {"objective_after", r.objective_after},
                         {"data_misfit", r.data_misfit},
                         {"constraint_residual", r.constraint_residual}});
    }
    json out = {{"mode", to_string(cfg.mode)},
                {"solver", solver_config_to_json(cfg)},
                {"iterations", iters},
                {"warnings", rec.diagnostics.warnings}};
    if (problem.truth) out["snr_db"] = number_or_inf(snr_db(*problem.truth, rec.image()));
    if (problem.truth_rho1 && problem.truth_rho2 && cfg.mode == Mode::combined) {
        out["component_leakage"] = component_leakage(rec.rho1, rec.rho2, *problem.truth_rho1, *problem.truth_rho2);
    }
    return out;
}

namespace {

json run_modes(const Problem& problem, const RunConfig& cfg, const std::vector<SolverConfig>& solvers) {
    fs::create_directories(cfg.output_dir);
    const auto start = std::chrono::steady_clock::now();
    json modes = json::object();
    json snr = json::object();
    for (std::size_t i = 0; i < cfg.modes.size(); ++i) {
        const Mode mode = cfg.modes[i];
        json r = write_mode_outputs(problem, cfg, mode, solvers[i]);
        if (r.contains("snr_db")) snr[to_string(mode)] = r["snr_db"];
        modes[to_string(mode)] = std::move(r);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json report = {{"schema", kReportSchema},
                   {"config",
                    {{"mask", cfg.mask.generic_string()},
                     {"noise_sigma", cfg.noise_sigma},
                     {"noise_seed", cfg.noise_seed},
                     {"samples", problem.samp.sample_count()},
                     {"sampled_fraction", problem.samp.mask().fraction()}}},
                   {"snr_db", snr},
                   {"modes", modes}};
    save_json(cfg.output_dir / "report.json", report);
    save_json(cfg.output_dir / "timing.json", {{"wall_time_s", wall}});
    return report;
}

}  // namespace

json run_recover(const RunConfig& cfg) {
    const Problem problem = load_problem(cfg);
    std::vector<SolverConfig> solvers;
    for (Mode m : cfg.modes) solvers.push_back(solver_for_mode(cfg.solver, m));
    return run_modes(problem, cfg, solvers);
}

SweepResult sweep_lambdas(const Problem& problem, const RunConfig& cfg, const std::vector<double>& lambda1,
                          const std::vector<double>& lambda2) {
    if (!problem.truth) throw ParameterError("sweep needs a truth image to score reconstructions");
    if (lambda1.empty() || lambda2.empty()) throw ParameterError("sweep needs at least one value per lambda list");
    SweepResult out;
    for (Mode mode : cfg.modes) {
        std::vector<std::pair<double, double>> grid;
        if (mode == Mode::first_order) {
            for (double l1 : lambda1) grid.emplace_back(l1, lambda2.front());
        } else if (mode == Mode::second_order) {
            for (double l2 : lambda2) grid.emplace_back(lambda1.front(), l2);
        } else {
            for (double l1 : lambda1)
                for (double l2 : lambda2) grid.emplace_back(l1, l2);
        }
        SweepPoint best{mode, 0.0, 0.0, -std::numeric_limits<double>::infinity()};
        for (const auto& [l1, l2] : grid) {
            SolverConfig s = solver_for_mode(cfg.solver, mode);
            s.lambda1 = l1;
            s.lambda2 = l2;
            double snr = -std::numeric_limits<double>::infinity();
            try {
                snr = snr_db(*problem.truth, irls_recover(problem.samp, s).image());
            } catch (const NumericalError&) {
                // diverged: scored as -inf
            }
            out.points.push_back({mode, l1, l2, snr});
            if (snr > best.snr_db) best = out.points.back();
        }
        out.best.push_back(best);
    }
    return out;
}

json run_sweep(const RunConfig& cfg, const std::vector<double>& lambda1, const std::vector<double>& lambda2) {
    const Problem problem = load_problem(cfg);
    const SweepResult result = sweep_lambdas(problem, cfg, lambda1, lambda2);
    std::vector<SolverConfig> solvers;
    json best = json::object();
    for (const auto& b : result.best) {
        SolverConfig s = solver_for_mode(cfg.solver, b.mode);
        s.lambda1 = b.lambda1;
        s.lambda2 = b.lambda2;
        solvers.push_back(s);
        best[to_string(b.mode)] = {{"lambda1", b.lambda1}, {"lambda2", b.lambda2}, {"snr_db", number_or_inf(b.snr_db)}};
    }
    json points = json::array();
    for (const auto& p : result.points) {
        points.push_back({{"mode", to_string(p.mode)},
                          {"lambda1", p.lambda1},
                          {"lambda2", p.lambda2},
                          {"snr_db", number_or_inf(p.snr_db)}});
    }
    json report = run_modes(problem, cfg, solvers);
    json sweep = {{"schema", "slr-sweep/1"}, {"lambda1", lambda1}, {"lambda2", lambda2}, {"points", points}, {"best", best}};
    save_json(cfg.output_dir / "sweep.json", sweep);
    report["sweep"] = sweep;
    return report;
}

}  // namespace slr
