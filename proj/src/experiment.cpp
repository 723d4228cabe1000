#include "ksreg/experiment.hpp"

#include <cmath>
#include <future>

namespace ksreg {

namespace {
constexpr double kDefaultCheckpoints = 2000.0;
}

PreparedRun prepare_run(const ScenarioFile& scenario, double tolerance) {
    scenario.validate();
    BodySet set;
    set.bodies = scenario.bodies;
    auto system = std::make_shared<PairSystem>(std::move(set));

    PreparedRun run;
    run.system = system;
    run.theta_ref = deg2rad(scenario.theta_ref_deg);

    double ds;
    if (scenario.checkpoint_spacing) {
        ds = *scenario.checkpoint_spacing;
    } else if (scenario.t_end) {
        // ds such that a constant-Lagrangian run would emit ~2000 checkpoints
        const double lambda0 = system->lagrangian(system->init_state(0.0, run.theta_ref));
        ds = lambda0 * *scenario.t_end / kDefaultCheckpoints;
    } else {
        ds = *scenario.s_end / kDefaultCheckpoints;
    }

    IntegratorConfig cfg;
    cfg.tolerance = tolerance;
    cfg.checkpoint_spacing = ds;
    cfg.initial_step = std::min(ds, 1e-2);
    run.integrator = std::make_shared<GbsIntegrator>(system->rhs_function(), cfg);
    if (scenario.s_end) {
        run.s_cap = *scenario.s_end;
        run.stop_time = -1.0;
    } else {
        run.s_cap = 1e9;  // the physical-time stop is the real horizon
        run.stop_time = *scenario.t_end;
    }
    return run;
}

namespace {

SimulationResult simulate_prepared(const PreparedRun& run, double tolerance, double vartheta,
                                   double s_cap, double stop_time) {
    SimulationResult res;
    res.system = run.system;
    res.integrator = run.integrator;
    res.theta_ref = run.theta_ref;
    res.vartheta = vartheta;
    res.tolerance = tolerance;

    const RegState init = run.system->init_state(vartheta, run.theta_ref);
    res.initial_energy = run.system->energy(init);
    res.trajectory = run.integrator->integrate(run.system->pack(init), s_cap,
                                               run.system->time_index(), stop_time);
    const auto drift = energy_drift(*run.system, res.trajectory);
    res.final_drift = drift.empty() ? 0.0 : drift.back().drift;
    res.t_esc = detect_escape(*run.system, res.trajectory);
    res.consistency_max = max_consistency_defect(*run.system, res.trajectory);
    res.bilinear_max = max_bilinear_defect(*run.system, res.trajectory);
    return res;
}

}  // namespace

SimulationResult run_simulate(const ScenarioFile& scenario, double tolerance, double theta_ref,
                              double vartheta) {
    PreparedRun run = prepare_run(scenario, tolerance);
    run.theta_ref = theta_ref;
    return simulate_prepared(run, tolerance, vartheta, run.s_cap, run.stop_time);
}

KsepResult run_ksep(const ScenarioFile& scenario, double tolerance, double theta_ref,
                    double vartheta) {
    if (vartheta == 0.0)
        throw std::invalid_argument(
            "run_ksep: vartheta must be nonzero (a zero offset reproduces the reference "
            "trajectory and carries no separation signal)");
    PreparedRun run = prepare_run(scenario, tolerance);
    run.theta_ref = theta_ref;

    KsepResult out;
    out.reference = simulate_prepared(run, tolerance, 0.0, run.s_cap, run.stop_time);
    // the rotated run must share the reference checkpoint grid exactly
    const double s_shared = out.reference.trajectory.s.back();
    out.rotated = simulate_prepared(run, tolerance, vartheta, s_shared, -1.0);

    out.series = k_separation(*run.system, out.reference.trajectory, out.rotated.trajectory,
                              vartheta);
    out.series.theta_ref = theta_ref;
    out.series.tolerance = tolerance;
    out.series.t_esc = out.reference.t_esc;
    out.series.t_cr = detect_transition(out.series);
    try {
        out.fit = fit_gamma(out.series);
        out.series.gamma_t = out.fit->gamma_t;
        out.series.gamma_s = out.fit->gamma_s;
        out.t_cr_predicted = estimate_tcr(out.fit->gamma_t, tolerance);
    } catch (const FitError&) {
        // series never entered the fit window; leave the fit empty
    }
    return out;
}

std::vector<KsepResult> run_sweep(const ScenarioFile& scenario,
                                  const std::vector<double>& tolerances, double theta_ref,
                                  double vartheta) {
    if (tolerances.size() < 2)
        throw std::invalid_argument("run_sweep: at least two tolerances required");
    for (double eps : tolerances)
        if (eps < 1e-14)
            throw std::invalid_argument(
                "run_sweep: tolerances below 1e-14 need extended precision arithmetic");

    std::vector<std::future<KsepResult>> futures;
    futures.reserve(tolerances.size());
    for (double eps : tolerances)
        futures.push_back(std::async(std::launch::async, [&, eps] {
            return run_ksep(scenario, eps, theta_ref, vartheta);
        }));
    std::vector<KsepResult> out;
    out.reserve(tolerances.size());
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

}  // namespace ksreg
