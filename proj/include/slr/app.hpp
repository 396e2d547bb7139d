#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slr/data.hpp"
#include "slr/solver.hpp"

namespace slr {

inline constexpr const char* kReportSchema = "slr-report/1";

// Relative paths in config files resolve against the config file's folder.
struct PhantomJob {
    PhantomSpec spec;
    std::filesystem::path output_dir;
};

struct MaskJob {
    MaskSpec spec;
    std::filesystem::path output_dir;
};

struct RunConfig {
    std::vector<Mode> modes;
    std::optional<std::filesystem::path> truth;  // spatial image, simulates b
    std::optional<std::filesystem::path> truth_rho1;
    std::optional<std::filesystem::path> truth_rho2;
    std::optional<std::filesystem::path> kspace;  // full-grid k-space, read at the mask
    std::filesystem::path mask;
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;
    SolverConfig solver;
    std::filesystem::path output_dir;
    bool export_raw = true;
    bool export_png = false;
};

PhantomJob parse_phantom_job(const nlohmann::json& j, const std::filesystem::path& base);
MaskJob parse_mask_job(const nlohmann::json& j, const std::filesystem::path& base);
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base);
SolverConfig parse_solver_config(const nlohmann::json& j);
nlohmann::json solver_config_to_json(const SolverConfig& cfg);

nlohmann::json load_json(const std::filesystem::path& path);
// Writes with a trailing newline; output is a pure function of the value.
void save_json(const std::filesystem::path& path, const nlohmann::json& j);

// Each returns the manifest/report it wrote.
nlohmann::json run_phantom(const PhantomJob& job);
nlohmann::json run_mask(const MaskJob& job);

struct Problem {
    SamplingOp samp;
    std::optional<ComplexImage> truth;
    std::optional<ComplexImage> truth_rho1;
    std::optional<ComplexImage> truth_rho2;
};

// Reads the mask and either simulates b from the truth image or gathers it
// from the k-space file.
Problem load_problem(const RunConfig& cfg);

SolverConfig solver_for_mode(const SolverConfig& base, Mode mode);

nlohmann::json recovery_to_json(const Recovery& rec, const Problem& problem, const SolverConfig& cfg);

// Runs every configured mode, writes <output_dir>/<mode>/{rho,rho1,rho2,error}.slr
// (and PNGs when requested) plus <output_dir>/report.json. Wall time goes to
// <output_dir>/timing.json so the report stays reproducible.
nlohmann::json run_recover(const RunConfig& cfg);

struct SweepPoint {
    Mode mode;
    double lambda1;
    double lambda2;
    double snr_db;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    // Best point per configured mode, in the order of cfg.modes.
    std::vector<SweepPoint> best;
};

// Grid search over the lambda lists for every configured mode: first_order
// uses lambda1 only, second_order lambda2 only. Needs a truth image.
SweepResult sweep_lambdas(const Problem& problem, const RunConfig& cfg, const std::vector<double>& lambda1,
                          const std::vector<double>& lambda2);

// sweep_lambdas, then rewrites the outputs of run_recover at the best
// lambdas and adds <output_dir>/sweep.json.
nlohmann::json run_sweep(const RunConfig& cfg, const std::vector<double>& lambda1,
                         const std::vector<double>& lambda2);

}  // namespace slr
