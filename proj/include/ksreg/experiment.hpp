#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ksreg/diagnostics.hpp"
#include "ksreg/scenario.hpp"

namespace ksreg {

/// Integration setup resolved from a scenario: the pair system, the
/// configured integrator, and the stopping rule. The checkpoint spacing
/// defaults to roughly 2000 checkpoints per run (estimated through the
/// initial Lagrangian when the horizon is given in physical time).
struct PreparedRun {
    std::shared_ptr<PairSystem> system;
    std::shared_ptr<GbsIntegrator> integrator;
    double s_cap = 0.0;      // hard cap on fictitious time
    double stop_time = -1.0; // stop at the first checkpoint with t >= stop_time, if >= 0
    double theta_ref = 0.0;  // radians
};

PreparedRun prepare_run(const ScenarioFile& scenario, double tolerance);

struct SimulationResult {
    std::shared_ptr<PairSystem> system;
    std::shared_ptr<GbsIntegrator> integrator;
    Trajectory trajectory;
    double theta_ref = 0.0;
    double vartheta = 0.0;
    double tolerance = 0.0;
    double initial_energy = 0.0;
    double final_drift = 0.0;
    std::optional<double> t_esc;
    double consistency_max = 0.0;
    double bilinear_max = 0.0;
};

/// Integrate one trajectory of the scenario with the given fiber offset
/// (radians) and collect the run summary.
SimulationResult run_simulate(const ScenarioFile& scenario, double tolerance, double theta_ref,
                              double vartheta);

struct KsepResult {
    SimulationResult reference;
    SimulationResult rotated;
    KsepSeries series;
    std::optional<GammaFit> fit;
    std::optional<double> t_cr_predicted;
};

/// Reference + rotated integration on a shared s-checkpoint grid, with
/// the separation series, the fitted growth rates, the measured
/// transition and the predicted critical time. vartheta must be nonzero.
KsepResult run_ksep(const ScenarioFile& scenario, double tolerance, double theta_ref,
                    double vartheta);

/// One separation series per tolerance on aligned grids. Requires at
/// least two tolerances, all >= 1e-14 (double precision only).
std::vector<KsepResult> run_sweep(const ScenarioFile& scenario,
                                  const std::vector<double>& tolerances, double theta_ref,
                                  double vartheta);

inline double deg2rad(double deg) { return deg * M_PI / 180.0; }

}  // namespace ksreg
