#ifndef RC_DRIVER_HPP
#define RC_DRIVER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rc/diagnostics.hpp"
#include "rc/regge.hpp"

// Batch experiment driver: single solves, h/r convergence sweeps, the
// compatibility audit, quality reports, and the shape-derivative check.
// All CSV output uses comment-prefixed headers and fixed formatting so that
// identical configurations produce byte-identical files.

namespace rc {

struct RunConfig {
    Rect rect{-0.25, -0.25, 0.25, 0.25};
    std::vector<double> h_list{2.5e-1, 1.3e-1, 6.3e-2, 3.1e-2, 1.6e-2};
    std::vector<int> orders{0, 1, 2, 3};
    double perturb_frac = 0.25;
    uint64_t seed = 1;
    int quad_boost = 0;
    std::string solver = "direct";  // "direct" or "cg"
    std::string metric = "cap";     // "cap" or "flat"
    std::string out_dir = ".";
    std::string mesh_in;
    std::string mesh_out;
    std::string dump_regge;
    std::string dump_rhs;
    std::string dump_solution;
    // Sweep truncation: meshes per order, keyed off r <= 1 / r >= 2.
    int sweep_meshes_low = 5;
    int sweep_meshes_high = 4;

    std::string canonical() const;
    std::string hash_hex() const;

    SolverKind solver_kind() const;
    int lagrange_degree(int r) const { return std::max(r, 1); }
};

// Flat key=value file; '#' starts a comment. Unknown keys are errors.
RunConfig load_config(const std::string& path);
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

AnalyticMetric metric_from_config(const RunConfig& cfg);

struct SolveOutput {
    double h = 0.0;
    int r = 0;
    int p = 1;
    double rel_error = 0.0;
    double abs_error = 0.0;
    bool zero_denominator = false;
    int ndof_lagrange = 0;
    int ndof_regge = 0;
    int ndof_total = 0;
    double compat_ratio = 0.0;  // |F . 1| / |F|_1
    double solve_residual = 0.0;
    double sup_u = 0.0;
    double wall_seconds = 0.0;
};

SolveOutput run_solve(const RunConfig& cfg, double h, int r);

struct ConvergenceRow {
    double h = 0.0;
    int r = 0;
    double error = 0.0;
    int ndof = 0;
    double rate = 0.0;  // fitted log-log slope over the final 3 points of r
    double wall_seconds = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;        // sorted by (r, descending h)
    std::map<int, double> fitted_rate;       // per order
    std::map<int, std::vector<double>> errors_by_order;
};

ConvergenceResult run_convergence(const RunConfig& cfg);
void write_convergence_csv(const RunConfig& cfg, const ConvergenceResult& res,
                           const std::string& path);

struct GaussBonnetRow {
    double h = 0.0;
    int r = 0;
    double ratio = 0.0;  // |F . 1| / |F|_1
};

struct GaussBonnetResult {
    std::vector<GaussBonnetRow> rows;
    double max_ratio = 0.0;
};

GaussBonnetResult run_gauss_bonnet(const RunConfig& cfg);

struct QualitySummaryRow {
    double h = 0.0;
    int r = 0;
    QualityReport report;
    JhReport jh;
};

struct QualitySweep {
    std::vector<QualitySummaryRow> rows;
};

QualitySweep run_quality(const RunConfig& cfg);
void write_quality_csv(const RunConfig& cfg, const QualitySweep& sweep, const std::string& path);

struct ShapeCheckRow {
    int sample = 0;
    double dt_coarse = 0.0, dt_fine = 0.0;
    double residual_coarse = 0.0, residual_fine = 0.0;
    double improvement = 0.0;  // residual_coarse / residual_fine
};

struct ShapeCheckResult {
    std::vector<ShapeCheckRow> rows;
    double min_improvement = 0.0;
};

// Runs the finite-difference consistency check of the metric shape
// derivative at t = 0.5 with degree-2 test fields.
ShapeCheckResult run_shape_check(const RunConfig& cfg, double h, int r, int n_samples = 5,
                                 double dt_coarse = 1e-2, double dt_fine = 1e-3);

// Least-squares slope of log(err) against log(h) over the last `points`
// entries (h descending).
double fit_rate(const std::vector<double>& hs, const std::vector<double>& errs, int points = 3);

}  // namespace rc

#endif
