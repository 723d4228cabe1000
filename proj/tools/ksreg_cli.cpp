#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ksreg/experiment.hpp"
#include "ksreg/io.hpp"

namespace fs = std::filesystem;
using namespace ksreg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitIntegrator = 3;
constexpr int kExitDiagnostic = 4;

struct CommonOpts {
    std::string scenario;
    std::optional<double> tol;
    std::vector<double> tols;
    std::optional<double> theta_ref_deg;
    std::optional<double> vartheta_deg;
    std::optional<double> t_end;
    std::optional<double> s_end;
    std::optional<int> checkpoints;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool multi_tol) {
    cmd->add_option("--scenario", o.scenario, "scenario file path or builtin name")->required();
    if (multi_tol)
        cmd->add_option("--tol", o.tols, "integration tolerance (repeat for a sweep)");
    else
        cmd->add_option("--tol", o.tol, "integration tolerance");
    cmd->add_option("--theta-ref", o.theta_ref_deg, "reference fiber angle, degrees");
    cmd->add_option("--vartheta", o.vartheta_deg, "fiber offset of the rotated run, degrees");
    cmd->add_option("--t-end", o.t_end, "horizon in physical time");
    cmd->add_option("--s-end", o.s_end, "horizon in fictitious time");
    cmd->add_option("--checkpoints", o.checkpoints, "approximate checkpoint count");
    cmd->add_option("--out", o.out_dir, "output directory");
}

// flag overrides on top of the scenario file
ScenarioFile resolve(const CommonOpts& o) {
    ScenarioFile sc = load_scenario(o.scenario);
    if (o.theta_ref_deg) sc.theta_ref_deg = *o.theta_ref_deg;
    if (o.vartheta_deg) sc.vartheta_deg = {*o.vartheta_deg};
    if (o.t_end) {
        sc.t_end = *o.t_end;
        sc.s_end.reset();
    }
    if (o.s_end) {
        sc.s_end = *o.s_end;
        sc.t_end.reset();
    }
    if (o.tol) sc.tolerances = {*o.tol};
    if (!o.tols.empty()) sc.tolerances = o.tols;
    if (!o.out_dir.empty()) sc.output_dir = o.out_dir;
    if (o.checkpoints) {
        if (*o.checkpoints < 1) throw ScenarioError("checkpoints", "must be >= 1");
        // re-derive the spacing from the requested count
        ScenarioFile probe = sc;
        probe.checkpoint_spacing.reset();
        BodySet set;
        set.bodies = probe.bodies;
        PairSystem system(std::move(set));
        double span;
        if (probe.s_end) {
            span = *probe.s_end;
        } else {
            const double lambda0 =
                system.lagrangian(system.init_state(0.0, deg2rad(probe.theta_ref_deg)));
            span = lambda0 * *probe.t_end;
        }
        sc.checkpoint_spacing = span / *o.checkpoints;
    }
    sc.validate();
    return sc;
}

double single_tolerance(const ScenarioFile& sc) {
    return sc.tolerances.empty() ? 1e-13 : sc.tolerances.front();
}

double single_vartheta_deg(const ScenarioFile& sc, double fallback) {
    return sc.vartheta_deg.empty() ? fallback : sc.vartheta_deg.front();
}

std::string eps_tag(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", eps);
    return buf;
}

int cmd_simulate(const CommonOpts& o) {
    const ScenarioFile sc = resolve(o);
    const double eps = single_tolerance(sc);
    const double vt = deg2rad(single_vartheta_deg(sc, 0.0));
    const SimulationResult res =
        run_simulate(sc, eps, deg2rad(sc.theta_ref_deg), o.vartheta_deg ? vt : 0.0);
    const fs::path dir = sc.output_dir;
    write_trajectory_csv(dir / (sc.name + "_trajectory.csv"), *res.system, res.trajectory);
    write_energy_csv(dir / (sc.name + "_energy.csv"), energy_drift(*res.system, res.trajectory));
    write_text_file(dir / (sc.name + "_summary.json"), simulate_summary_json(sc, res));
    std::cout << simulate_summary_json(sc, res);
    return kExitOk;
}

int cmd_ksep(const CommonOpts& o) {
    const ScenarioFile sc = resolve(o);
    const double eps = single_tolerance(sc);
    const double vt_deg = single_vartheta_deg(sc, 120.0);
    const KsepResult res = run_ksep(sc, eps, deg2rad(sc.theta_ref_deg), deg2rad(vt_deg));
    const fs::path dir = sc.output_dir;
    write_ksep_csv(dir / (sc.name + "_ksep.csv"), res.series);
    write_text_file(dir / (sc.name + "_ksep.svg"),
                    ksep_svg({&res.series}, {"eps=" + eps_tag(eps)}));
    write_text_file(dir / (sc.name + "_ksep_summary.json"), ksep_summary_json(sc, res));
    std::cout << ksep_summary_json(sc, res);
    return kExitOk;
}

int cmd_sweep(const CommonOpts& o) {
    const ScenarioFile sc = resolve(o);
    if (sc.tolerances.size() < 2)
        throw std::invalid_argument("sweep: at least two --tol values required");
    const double vt_deg = single_vartheta_deg(sc, 30.0);
    const auto results =
        run_sweep(sc, sc.tolerances, deg2rad(sc.theta_ref_deg), deg2rad(vt_deg));
    const fs::path dir = sc.output_dir;
    std::vector<const KsepSeries*> all;
    std::vector<std::string> labels;
    for (const auto& res : results) {
        write_ksep_csv(dir / (sc.name + "_ksep_eps" + eps_tag(res.series.tolerance) + ".csv"),
                       res.series);
        all.push_back(&res.series);
        labels.push_back("eps=" + eps_tag(res.series.tolerance));
    }
    write_sweep_csv(dir / (sc.name + "_sweep.csv"), results);
    write_text_file(dir / (sc.name + "_sweep.svg"), ksep_svg(all, labels));
    write_text_file(dir / (sc.name + "_sweep_summary.json"), sweep_summary_json(sc, results));
    std::cout << sweep_summary_json(sc, results);
    return kExitOk;
}

int cmd_poincare(const CommonOpts& o, const std::string& plane_spec, int body, const std::string& pair,
                 int nodes) {
    const ScenarioFile sc = resolve(o);
    const double eps = single_tolerance(sc);

    Plane plane;
    {
        std::istringstream ss(plane_spec);
        double v[6];
        char comma;
        for (int i = 0; i < 6; ++i) {
            if (!(ss >> v[i])) throw ScenarioError("plane", "expected nx,ny,nz,px,py,pz");
            if (i < 5 && !(ss >> comma)) throw ScenarioError("plane", "expected nx,ny,nz,px,py,pz");
        }
        plane.normal = Vec3{v[0], v[1], v[2]};
        plane.point = Vec3{v[3], v[4], v[5]};
    }
    SectionSelector sel;
    if (body >= 0) {
        sel.kind = SectionSelector::Kind::Body;
        sel.index = body;
    }

    const double vt = o.vartheta_deg ? deg2rad(*o.vartheta_deg) : 0.0;
    const SimulationResult res = run_simulate(sc, eps, deg2rad(sc.theta_ref_deg), vt);
    if (!pair.empty()) {
        std::istringstream ss(pair);
        int i, j;
        char comma;
        if (!(ss >> i >> comma >> j)) throw ScenarioError("pair", "expected i,j");
        sel.kind = SectionSelector::Kind::Pair;
        sel.index = res.system->pair_index(std::min(i, j), std::max(i, j));
    }
    const PoincareResult pr =
        poincare(*res.system, *res.integrator, res.trajectory, plane, sel, res.theta_ref, nodes);
    const fs::path dir = sc.output_dir;
    write_poincare_csv(dir / (sc.name + "_poincare.csv"), pr);
    nlohmann::json j;
    j["scenario"] = sc.name;
    j["crossings"] = pr.crossings.size();
    j["grazing"] = pr.grazing_s.size();
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_fiberviz(const std::vector<std::string>& points, int n, const std::string& out_dir) {
    std::vector<Fiber> fibers;
    for (const auto& spec : points) {
        std::istringstream ss(spec);
        double x, y, z;
        char c;
        if (!(ss >> x >> c >> y >> c >> z)) throw ScenarioError("point", "expected x,y,z");
        fibers.push_back(make_fiber(Vec3{x, y, z}, 0.0));
    }
    if (fibers.empty()) throw ScenarioError("point", "at least one --point required");

    const fs::path dir = out_dir.empty() ? "out" : out_dir;
    write_fiber_csv(dir / "fibers.csv", fibers, n);

    // polylines of projected fiber samples, split at projection blow-ups
    std::vector<std::vector<Vec3>> polylines;
    for (const auto& fib : fibers) {
        std::vector<Vec3> line;
        for (int k = 0; k <= n; ++k) {  // repeat the first point to close the curve
            const double vartheta = fib.branch_sign * (2.0 * M_PI * (k % n) / n);
            const KSVec w = fiber_rotate(fib.generator, vartheta);
            try {
                const Vec3 p = stereographic_project(w, 4);
                if (norm(p) > 1e6) throw ProjectionError("far");
                line.push_back(p);
            } catch (const ProjectionError&) {
                if (!line.empty()) polylines.push_back(std::move(line));
                line.clear();
            }
        }
        if (!line.empty()) polylines.push_back(std::move(line));
    }
    write_text_file(dir / "fibers.svg", polyline3_svg(polylines));
    nlohmann::json j;
    j["fibers"] = fibers.size();
    j["samples_per_fiber"] = n;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_estimate(std::optional<double> gamma, std::optional<double> tol,
                 std::optional<double> t_end) {
    if (!gamma) throw ScenarioError("gamma", "required");
    nlohmann::json j;
    j["gamma_t"] = *gamma;
    if (tol) j["t_cr"] = estimate_tcr(*gamma, *tol);
    if (t_end) j["tolerance"] = estimate_tolerance(*gamma, *t_end);
    if (!tol && !t_end) throw ScenarioError("estimate", "give --tol and/or --t-end");
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KS-regularized N-body propagation and topological-stability diagnostics"};
    app.require_subcommand(1);

    CommonOpts sim_o, ksep_o, sweep_o, poin_o;
    auto* sim = app.add_subcommand("simulate", "integrate one trajectory, write CSV + summary");
    add_common(sim, sim_o, false);
    auto* ksep = app.add_subcommand("ksep", "K-separation of a rotated run against the reference");
    add_common(ksep, ksep_o, false);
    auto* sweep = app.add_subcommand("sweep", "K-separation across integration tolerances");
    add_common(sweep, sweep_o, true);

    auto* poin = app.add_subcommand("poincare", "fiberized Poincare section crossings");
    add_common(poin, poin_o, false);
    std::string plane_spec = "1,0,0,0,0,0";
    int poin_body = -1;
    std::string poin_pair;
    int poin_nodes = 64;
    poin->add_option("--plane", plane_spec, "section plane nx,ny,nz,px,py,pz");
    poin->add_option("--body", poin_body, "section test on this body's position");
    poin->add_option("--pair", poin_pair, "section test on relative coordinate i,j");
    poin->add_option("--nodes", poin_nodes, "quadrature nodes for fiber distances");

    auto* fib = app.add_subcommand("fiberviz", "stereographic fiber projections");
    std::vector<std::string> fib_points;
    int fib_n = 256;
    std::string fib_out;
    fib->add_option("--point", fib_points, "Cartesian point x,y,z (repeatable)")->required();
    fib->add_option("--n-samples", fib_n, "samples per fiber");
    fib->add_option("--out", fib_out, "output directory");

    auto* est = app.add_subcommand("estimate", "critical-time / tolerance calculator");
    std::optional<double> est_gamma, est_tol, est_tend;
    est->add_option("--gamma", est_gamma, "growth rate gamma_t")->required();
    est->add_option("--tol", est_tol, "integration tolerance (gives t_cr)");
    est->add_option("--t-end", est_tend, "target horizon (gives the required tolerance)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_o);
        if (ksep->parsed()) return cmd_ksep(ksep_o);
        if (sweep->parsed()) return cmd_sweep(sweep_o);
        if (poin->parsed())
            return cmd_poincare(poin_o, plane_spec, poin_body, poin_pair, poin_nodes);
        if (fib->parsed()) return cmd_fiberviz(fib_points, fib_n, fib_out);
        if (est->parsed()) return cmd_estimate(est_gamma, est_tol, est_tend);
    } catch (const ScenarioError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::out_of_range& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const IntegrationError& e) {
        std::cerr << "integrator failure: " << e.what() << " (last valid s = " << e.last_s
                  << ")\n";
        return kExitIntegrator;
    } catch (const CollisionError& e) {
        std::cerr << "integrator failure: " << e.what() << "\n";
        return kExitIntegrator;
    } catch (const FitError& e) {
        std::cerr << "diagnostic failure: " << e.what() << "\n";
        return kExitDiagnostic;
    } catch (const std::exception& e) {
        std::cerr << "diagnostic failure: " << e.what() << "\n";
        return kExitDiagnostic;
    }
    return kExitInput;
}
