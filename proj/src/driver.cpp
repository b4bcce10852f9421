#include "rc/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <memory>
#include <sstream>

namespace rc {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("driver: cannot open '" + path + "' for writing");
    return out;
}

double wall_now() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Spaces keep pointers into the mesh, so everything lives behind stable
// heap allocations for the duration of a run.
struct Problem {
    std::unique_ptr<Mesh> mesh;
    AnalyticMetric g;
    std::unique_ptr<ReggeSpace> regge_space;
    std::unique_ptr<ReggeMetric> gh;
    std::unique_ptr<LagrangeSpace> lagrange;
    QuadSpec quad;
};

Problem build_problem(const RunConfig& cfg, double h, int r) {
    Problem prob;
    prob.mesh = std::make_unique<Mesh>(
        cfg.mesh_in.empty() ? generate_perturbed_grid(cfg.rect, h, cfg.perturb_frac, cfg.seed)
                            : load_mesh(cfg.mesh_in));
    prob.g = metric_from_config(cfg);
    int p = cfg.lagrange_degree(r);
    prob.quad = QuadSpec::for_orders(p, r, cfg.quad_boost);
    prob.regge_space = std::make_unique<ReggeSpace>(*prob.mesh, r);
    prob.gh = std::make_unique<ReggeMetric>(interpolate_metric(*prob.regge_space, prob.g, prob.quad));

    auto bad = check_positivity(*prob.gh, prob.quad);
    if (!bad.empty())
        throw Error("driver: interpolated metric loses positive definiteness on triangle " +
                    std::to_string(bad.front().tri) + "; refine the mesh or raise the order");

    prob.lagrange = std::make_unique<LagrangeSpace>(*prob.mesh, p);
    return prob;
}

}  // namespace

std::string RunConfig::canonical() const {
    std::ostringstream ss;
    ss << "rect=" << fmt(rect.x0) << "," << fmt(rect.y0) << "," << fmt(rect.x1) << ","
       << fmt(rect.y1) << ";h=";
    for (double h : h_list) ss << fmt(h) << ",";
    ss << ";orders=";
    for (int r : orders) ss << r << ",";
    ss << ";perturb=" << fmt(perturb_frac) << ";seed=" << seed << ";boost=" << quad_boost
       << ";solver=" << solver << ";metric=" << metric << ";low=" << sweep_meshes_low
       << ";high=" << sweep_meshes_high;
    return ss.str();
}

std::string RunConfig::hash_hex() const {
    // FNV-1a over the canonical form.
    uint64_t hash = 1469598103934665603ull;
    for (char c : canonical()) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

SolverKind RunConfig::solver_kind() const {
    if (solver == "direct") return SolverKind::Direct;
    if (solver == "cg") return SolverKind::ConjugateGradient;
    throw Error("driver: unknown solver '" + solver + "' (expected direct or cg)");
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto parse_doubles = [](const std::string& v) {
        std::vector<double> out;
        std::istringstream ss(v);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) out.push_back(std::stod(tok));
        }
        return out;
    };
    if (key == "rect") {
        auto vals = parse_doubles(value);
        if (vals.size() != 4) throw Error("config: rect needs 4 comma-separated numbers");
        cfg.rect = {vals[0], vals[1], vals[2], vals[3]};
    } else if (key == "h") {
        cfg.h_list = parse_doubles(value);
        if (cfg.h_list.empty()) throw Error("config: empty h list");
        for (size_t i = 0; i + 1 < cfg.h_list.size(); ++i)
            if (cfg.h_list[i] <= cfg.h_list[i + 1])
                throw Error("config: h values must be positive and descending");
        if (cfg.h_list.back() <= 0.0) throw Error("config: h values must be positive");
    } else if (key == "orders") {
        cfg.orders.clear();
        for (double v : parse_doubles(value)) {
            int r = static_cast<int>(v);
            if (r < 0) throw Error("config: orders must be nonnegative");
            cfg.orders.push_back(r);
        }
    } else if (key == "perturb") {
        cfg.perturb_frac = std::stod(value);
    } else if (key == "seed") {
        cfg.seed = std::stoull(value);
    } else if (key == "quad_boost") {
        cfg.quad_boost = std::stoi(value);
    } else if (key == "solver") {
        cfg.solver = value;
    } else if (key == "metric") {
        if (value != "cap" && value != "flat")
            throw Error("config: metric must be 'cap' or 'flat'");
        cfg.metric = value;
    } else if (key == "out_dir") {
        cfg.out_dir = value;
    } else if (key == "sweep_meshes_low") {
        cfg.sweep_meshes_low = std::stoi(value);
    } else if (key == "sweep_meshes_high") {
        cfg.sweep_meshes_high = std::stoi(value);
    } else {
        throw Error("config: unknown key '" + key + "'");
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open '" + path + "'");
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config: " + path + ":" + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

AnalyticMetric metric_from_config(const RunConfig& cfg) {
    if (cfg.metric == "cap") return spherical_cap();
    if (cfg.metric == "flat") return flat_metric();
    throw Error("driver: unknown metric '" + cfg.metric + "'");
}

SolveOutput run_solve(const RunConfig& cfg, double h, int r) {
    double t0 = wall_now();
    Problem prob = build_problem(cfg, h, r);

    if (!cfg.mesh_out.empty()) save_mesh(*prob.mesh, cfg.mesh_out);
    if (!cfg.dump_regge.empty()) {
        std::ofstream out = open_out(cfg.dump_regge);
        out << "# triangle,monomial,component,coefficient,config\n";
        std::string hash = cfg.hash_hex();
        for (int t = 0; t < prob.mesh->n_triangles(); ++t) {
            const auto& c = prob.gh->coeffs(t);
            for (int k = 0; k < prob.regge_space->n_monomials(); ++k)
                for (int comp = 0; comp < 3; ++comp)
                    out << t << "," << k << "," << comp << "," << fmt(c[3 * k + comp]) << ","
                        << hash << "\n";
        }
    }

    Eigen::SparseMatrix<double> A = assemble_stiffness(*prob.lagrange, *prob.gh, prob.quad);
    Eigen::VectorXd m = assemble_volume_functional(*prob.lagrange, *prob.gh, prob.quad);

    CurvatureBreakdown alpha = alpha_dist(prob.g, *prob.gh, *prob.lagrange, prob.quad);
    CurvatureBreakdown kda = kda_dist(*prob.gh, *prob.lagrange, prob.quad);
    Eigen::VectorXd F = alpha.total() - kda.total();

    if (!cfg.dump_rhs.empty()) {
        std::ofstream out = open_out(cfg.dump_rhs);
        out << "# dof,triangle_part,interior_edge_part,interior_vertex_part,"
               "boundary_edge_part,boundary_vertex_part,config\n";
        std::string hash = cfg.hash_hex();
        for (int i = 0; i < F.size(); ++i)
            out << i << "," << fmt(-kda.triangle(i)) << "," << fmt(-kda.interior_edge(i)) << ","
                << fmt(-kda.interior_vertex(i)) << "," << fmt(alpha.boundary_edge(i)) << ","
                << fmt(alpha.boundary_vertex(i)) << "," << hash << "\n";
    }

    SolveOutput out;
    out.h = h;
    out.r = r;
    out.p = cfg.lagrange_degree(r);
    out.ndof_lagrange = prob.lagrange->ndof();
    out.ndof_regge = prob.regge_space->ndof();
    out.ndof_total = out.ndof_lagrange + out.ndof_regge;
    out.compat_ratio = F.lpNorm<1>() > 0.0 ? std::abs(F.sum()) / F.lpNorm<1>() : 0.0;

    SolveResult sol = solve_constrained(A, m, F, *prob.lagrange, cfg.solver_kind());
    out.solve_residual = sol.residual;
    out.sup_u = sol.u.coeffs.size() ? sol.u.coeffs.lpNorm<Eigen::Infinity>() : 0.0;

    GradErrorResult err = l2_error_grad(sol.u, prob.g.connection_form, prob.g, prob.quad);
    out.rel_error = err.rel;
    out.abs_error = err.abs;
    out.zero_denominator = err.zero_denominator;

    if (!cfg.dump_solution.empty()) {
        std::ofstream dump = open_out(cfg.dump_solution);
        dump << "# dof,x,y,u,config\n";
        std::string hash = cfg.hash_hex();
        for (int i = 0; i < sol.u.coeffs.size(); ++i) {
            Vec2 c = prob.lagrange->dof_coord(i);
            dump << i << "," << fmt(c.x) << "," << fmt(c.y) << "," << fmt(sol.u.coeffs(i)) << ","
                 << hash << "\n";
        }
    }

    out.wall_seconds = wall_now() - t0;
    return out;
}

double fit_rate(const std::vector<double>& hs, const std::vector<double>& errs, int points) {
    int n = static_cast<int>(hs.size());
    int use = std::min(points, n);
    if (use < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = n - use; i < n; ++i) {
        double x = std::log(hs[i]);
        double y = std::log(std::max(errs[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (use * sxy - sx * sy) / (use * sxx - sx * sx);
}

ConvergenceResult run_convergence(const RunConfig& cfg) {
    ConvergenceResult res;
    for (int r : cfg.orders) {
        int n_mesh = r <= 1 ? cfg.sweep_meshes_low : cfg.sweep_meshes_high;
        n_mesh = std::min<int>(n_mesh, static_cast<int>(cfg.h_list.size()));
        std::vector<double> hs, errs;
        for (int i = 0; i < n_mesh; ++i) {
            double h = cfg.h_list[i];
            SolveOutput s = run_solve(cfg, h, r);
            ConvergenceRow row;
            row.h = h;
            row.r = r;
            row.error = s.rel_error;
            row.ndof = s.ndof_total;
            row.wall_seconds = s.wall_seconds;
            res.rows.push_back(row);
            hs.push_back(h);
            errs.push_back(s.rel_error);
        }
        double rate = fit_rate(hs, errs, 3);
        res.fitted_rate[r] = rate;
        res.errors_by_order[r] = errs;
        for (auto& row : res.rows)
            if (row.r == r) row.rate = rate;
    }
    std::stable_sort(res.rows.begin(), res.rows.end(), [](const auto& a, const auto& b) {
        if (a.r != b.r) return a.r < b.r;
        return a.h > b.h;
    });
    return res;
}

void write_convergence_csv(const RunConfig& cfg, const ConvergenceResult& res,
                           const std::string& path) {
    std::ofstream out = open_out(path);
    out << "# h,r,E,ndof,rate,config\n";
    std::string hash = cfg.hash_hex();
    for (const auto& row : res.rows)
        out << fmt(row.h) << "," << row.r << "," << fmt(row.error) << "," << row.ndof << ","
            << fmt(row.rate) << "," << hash << "\n";
}

GaussBonnetResult run_gauss_bonnet(const RunConfig& cfg) {
    GaussBonnetResult res;
    for (int r : cfg.orders) {
        int n_mesh = r <= 1 ? cfg.sweep_meshes_low : cfg.sweep_meshes_high;
        n_mesh = std::min<int>(n_mesh, static_cast<int>(cfg.h_list.size()));
        for (int i = 0; i < n_mesh; ++i) {
            double h = cfg.h_list[i];
            Problem prob = build_problem(cfg, h, r);
            Eigen::VectorXd F = rhs_functional(prob.g, *prob.gh, *prob.lagrange, prob.quad);
            double ratio = F.lpNorm<1>() > 0.0 ? std::abs(F.sum()) / F.lpNorm<1>() : 0.0;
            res.rows.push_back({h, r, ratio});
            res.max_ratio = std::max(res.max_ratio, ratio);
        }
    }
    return res;
}

QualitySweep run_quality(const RunConfig& cfg) {
    QualitySweep sweep;
    for (int r : cfg.orders) {
        int n_mesh = r <= 1 ? cfg.sweep_meshes_low : cfg.sweep_meshes_high;
        n_mesh = std::min<int>(n_mesh, static_cast<int>(cfg.h_list.size()));
        for (int i = 0; i < n_mesh; ++i) {
            double h = cfg.h_list[i];
            Problem prob = build_problem(cfg, h, r);
            AnalyticField gf(prob.g);
            QualitySummaryRow row;
            row.h = h;
            row.r = r;
            row.report = quality_report(*prob.mesh, gf, *prob.gh, h);
            row.jh = jh_report(gf, *prob.gh, *prob.mesh);
            sweep.rows.push_back(std::move(row));
        }
    }
    return sweep;
}

void write_quality_csv(const RunConfig& cfg, const QualitySweep& sweep, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "# h,r,tri_id,h_T,rho_T,ratio,C_g_gh,C_gh_g,Kv_T,config\n";
    std::string hash = cfg.hash_hex();
    for (const auto& row : sweep.rows) {
        for (size_t t = 0; t < row.report.per_triangle.size(); ++t) {
            const TriangleQuality& q = row.report.per_triangle[t];
            out << fmt(row.h) << "," << row.r << "," << t << "," << fmt(q.h_T) << ","
                << fmt(q.rho) << "," << fmt(q.ratio) << "," << fmt(q.C_g_gh) << ","
                << fmt(q.C_gh_g) << "," << fmt(q.Kv) << "," << hash << "\n";
        }
        const QualityReport& rep = row.report;
        out << "# summary h=" << fmt(row.h) << " r=" << row.r << " K=" << fmt(rep.K)
            << " Kprime=" << fmt(rep.K_prime) << " K_V=" << fmt(rep.K_V)
            << " C_g_gh=" << fmt(rep.C_g_gh) << " C_gh_g=" << fmt(rep.C_gh_g)
            << " D_g_gh=" << fmt(rep.D_g_gh) << " D_gh_g=" << fmt(rep.D_gh_g)
            << " gap=" << fmt(rep.metric_gap_inf) << " jh_dev=" << fmt(row.jh.sup_deviation)
            << " jh_adj=" << fmt(row.jh.adjoint_residual) << "\n";
    }
}

ShapeCheckResult run_shape_check(const RunConfig& cfg, double h, int r, int n_samples,
                                 double dt_coarse, double dt_fine) {
    RunConfig local = cfg;
    local.mesh_in.clear();
    Problem prob = build_problem(local, h, r);
    // The consistency statement needs C2 test functions per triangle; use
    // degree 2 regardless of the solve order.
    LagrangeSpace space(*prob.mesh, 2);

    std::mt19937_64 rng(cfg.seed * 2654435761u + 17);
    auto coef = [&rng]() { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };

    ShapeCheckResult res;
    res.min_improvement = 1e300;
    for (int s = 0; s < n_samples; ++s) {
        ScalarField v;
        v.space = &space;
        v.coeffs = Eigen::VectorXd::NullaryExpr(space.ndof(), [&](Eigen::Index) { return coef(); });

        ShapeDerivativeResult coarse =
            shape_derivative_check(prob.g, *prob.gh, v, 0.5, dt_coarse, prob.quad);
        ShapeDerivativeResult fine =
            shape_derivative_check(prob.g, *prob.gh, v, 0.5, dt_fine, prob.quad);

        ShapeCheckRow row;
        row.sample = s;
        row.dt_coarse = dt_coarse;
        row.dt_fine = dt_fine;
        row.residual_coarse = coarse.residual;
        row.residual_fine = fine.residual;
        row.improvement = fine.residual > 0.0 ? coarse.residual / fine.residual : 1e300;
        res.min_improvement = std::min(res.min_improvement, row.improvement);
        res.rows.push_back(row);
    }
    return res;
}

}  // namespace rc
