#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "rc/driver.hpp"

// Batch driver for the connection-form solver: single solves, convergence
// sweeps, the compatibility audit, mesh-quality reports, the shape-derivative
// consistency check, and mesh generation / inspection.

namespace {

void add_common(CLI::App* cmd, rc::RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "key=value config file; flags override it");
    cmd->add_option_function<std::vector<double>>(
           "--h", [&cfg](const std::vector<double>& v) { cfg.h_list = v; },
           "mesh spacings, descending");
    cmd->add_option_function<std::vector<int>>(
           "--order,-r", [&cfg](const std::vector<int>& v) { cfg.orders = v; },
           "metric interpolation orders");
    cmd->add_option("--perturb", cfg.perturb_frac, "vertex perturbation as a fraction of h");
    cmd->add_option("--seed", cfg.seed, "RNG seed for mesh perturbation");
    cmd->add_option("--quad-boost", cfg.quad_boost, "extra quadrature degree");
    cmd->add_option("--solver", cfg.solver, "direct or cg");
    cmd->add_option("--metric", cfg.metric, "cap or flat");
    cmd->add_option("--out-dir", cfg.out_dir, "directory for CSV output");
    cmd->add_option("--mesh-in", cfg.mesh_in, "read the mesh instead of generating it");
    cmd->add_option("--mesh-out", cfg.mesh_out, "save the generated mesh");
}

rc::RunConfig finalize(const CLI::App* cmd, rc::RunConfig flags_cfg, const std::string& path) {
    if (path.empty()) return flags_cfg;
    rc::RunConfig cfg = rc::load_config(path);
    // Re-apply any flags given on the command line on top of the file.
    for (const CLI::Option* opt : cmd->get_options()) {
        if (opt->count() == 0) continue;
        const std::string& name = opt->get_name();
        if (name == "--config") continue;
        if (name == "--h") cfg.h_list = flags_cfg.h_list;
        else if (name == "--order") cfg.orders = flags_cfg.orders;
        else if (name == "--perturb") cfg.perturb_frac = flags_cfg.perturb_frac;
        else if (name == "--seed") cfg.seed = flags_cfg.seed;
        else if (name == "--quad-boost") cfg.quad_boost = flags_cfg.quad_boost;
        else if (name == "--solver") cfg.solver = flags_cfg.solver;
        else if (name == "--metric") cfg.metric = flags_cfg.metric;
        else if (name == "--out-dir") cfg.out_dir = flags_cfg.out_dir;
        else if (name == "--mesh-in") cfg.mesh_in = flags_cfg.mesh_in;
        else if (name == "--mesh-out") cfg.mesh_out = flags_cfg.mesh_out;
    }
    return cfg;
}

std::string joined(const std::string& dir, const std::string& file) {
    if (dir.empty() || dir == ".") return file;
    return dir + "/" + file;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intrinsic connection-form solver on Regge metric approximations"};
    app.require_subcommand(1);

    rc::RunConfig cfg;
    std::string config_path;

    auto* solve = app.add_subcommand("solve", "single solve at the first (h, r) of the config");
    add_common(solve, cfg, config_path);
    std::string dump_solution, dump_rhs, dump_regge;
    solve->add_option("--dump-solution", dump_solution, "CSV of (dof, x, y, u)");
    solve->add_option("--dump-rhs", dump_rhs, "CSV of the right-hand side breakdown");
    solve->add_option("--dump-regge", dump_regge, "CSV of interpolated metric coefficients");

    auto* conv = app.add_subcommand("convergence", "h/r sweep with fitted rates");
    add_common(conv, cfg, config_path);

    auto* gb = app.add_subcommand("gauss-bonnet", "compatibility audit of the right-hand side");
    add_common(gb, cfg, config_path);

    auto* quality = app.add_subcommand("quality", "intrinsic mesh-quality report");
    add_common(quality, cfg, config_path);

    auto* shape = app.add_subcommand("shape-check", "finite-difference shape-derivative check");
    add_common(shape, cfg, config_path);

    auto* meshcmd = app.add_subcommand("mesh", "generate or inspect a mesh");
    add_common(meshcmd, cfg, config_path);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* active = app.get_subcommands().front();
        rc::RunConfig run_cfg = finalize(active, cfg, config_path);

        if (active == solve) {
            run_cfg.dump_solution = dump_solution.empty()
                                        ? joined(run_cfg.out_dir, "solution.csv")
                                        : dump_solution;
            run_cfg.dump_rhs = dump_rhs;
            run_cfg.dump_regge = dump_regge;
            rc::SolveOutput out = rc::run_solve(run_cfg, run_cfg.h_list.front(),
                                                run_cfg.orders.front());
            std::printf("h=%.4e r=%d p=%d E=%.6e ndof=%d compat=%.3e residual=%.3e wall=%.2fs\n",
                        out.h, out.r, out.p, out.rel_error, out.ndof_total, out.compat_ratio,
                        out.solve_residual, out.wall_seconds);
        } else if (active == conv) {
            rc::ConvergenceResult res = rc::run_convergence(run_cfg);
            std::string path = joined(run_cfg.out_dir, "convergence.csv");
            rc::write_convergence_csv(run_cfg, res, path);
            for (const auto& row : res.rows)
                std::printf("r=%d h=%.4e E=%.6e ndof=%d wall=%.2fs\n", row.r, row.h, row.error,
                            row.ndof, row.wall_seconds);
            for (const auto& [r, rate] : res.fitted_rate)
                std::printf("r=%d fitted rate %.3f\n", r, rate);
            std::printf("wrote %s\n", path.c_str());
        } else if (active == gb) {
            rc::GaussBonnetResult res = rc::run_gauss_bonnet(run_cfg);
            for (const auto& row : res.rows)
                std::printf("h=%.4e r=%d |F.1|/|F|_1 = %.3e\n", row.h, row.r, row.ratio);
            bool pass = res.max_ratio <= 1e-8;
            std::printf("max ratio %.3e: %s\n", res.max_ratio, pass ? "PASS" : "FAIL");
            return pass ? 0 : 1;
        } else if (active == quality) {
            rc::QualitySweep sweep = rc::run_quality(run_cfg);
            std::string path = joined(run_cfg.out_dir, "quality.csv");
            rc::write_quality_csv(run_cfg, sweep, path);
            bool ok = true;
            for (const auto& row : sweep.rows) {
                std::printf("h=%.4e r=%d K=%.3f K'=%.3f K_V=%.3f gap=%.3e jh=%.3e\n", row.h,
                            row.r, row.report.K, row.report.K_prime, row.report.K_V,
                            row.report.metric_gap_inf, row.jh.sup_deviation);
                for (const auto& q : row.report.per_triangle)
                    ok = ok && q.rho <= q.h_T * (1.0 + 1e-12);
                ok = ok && row.report.metric_gap_inf < 1.0;
            }
            std::printf("wrote %s\n", path.c_str());
            return ok ? 0 : 1;
        } else if (active == shape) {
            rc::ShapeCheckResult res = rc::run_shape_check(run_cfg, run_cfg.h_list.front(),
                                                           run_cfg.orders.front());
            for (const auto& row : res.rows)
                std::printf("sample %d: residual %.3e -> %.3e (x%.1f)\n", row.sample,
                            row.residual_coarse, row.residual_fine, row.improvement);
            bool pass = res.min_improvement >= 50.0;
            std::printf("min improvement x%.1f: %s\n", res.min_improvement, pass ? "PASS" : "FAIL");
            return pass ? 0 : 1;
        } else if (active == meshcmd) {
            if (!run_cfg.mesh_in.empty()) {
                rc::Mesh mesh = rc::load_mesh(run_cfg.mesh_in);
                std::printf("V=%d E=%d T=%d chi=%d\n", mesh.n_vertices(), mesh.n_edges(),
                            mesh.n_triangles(), mesh.euler_characteristic());
            } else {
                rc::Mesh mesh = rc::generate_perturbed_grid(
                    run_cfg.rect, run_cfg.h_list.front(), run_cfg.perturb_frac, run_cfg.seed);
                std::string path = run_cfg.mesh_out.empty()
                                       ? joined(run_cfg.out_dir, "mesh.txt")
                                       : run_cfg.mesh_out;
                rc::save_mesh(mesh, path);
                std::printf("V=%d E=%d T=%d chi=%d -> %s\n", mesh.n_vertices(), mesh.n_edges(),
                            mesh.n_triangles(), mesh.euler_characteristic(), path.c_str());
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
