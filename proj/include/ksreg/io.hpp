#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ksreg/diagnostics.hpp"
#include "ksreg/experiment.hpp"

namespace ksreg {

/// Shortest-round-trip-safe decimal rendering: 17 significant digits.
std::string format_g17(double v);

/// "s,t,q0x,q0y,q0z,v0x,v0y,v0z,..." — one row per checkpoint.
void write_trajectory_csv(const std::filesystem::path& path, const PairSystem& system,
                          const Trajectory& traj);

/// "t,drift" — relative energy drift per checkpoint.
void write_energy_csv(const std::filesystem::path& path,
                      const std::vector<DriftSample>& drift);

/// "s,t,dK".
void write_ksep_csv(const std::filesystem::path& path, const KsepSeries& series);

/// "eps,s,t,dK" — the overlay of a tolerance sweep.
void write_sweep_csv(const std::filesystem::path& path, const std::vector<KsepResult>& results);

/// "n,s,t,u1,u2,u3,u4,dist_prev".
void write_poincare_csv(const std::filesystem::path& path, const PoincareResult& result);

/// Fiber debug dump: "theta,u1,u2,u3,u4,px,py,pz" where p is the
/// stereographic image of the fiber point (pole axis 4).
void write_fiber_csv(const std::filesystem::path& path, const std::vector<Fiber>& fibers,
                     int n_samples);

void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string simulate_summary_json(const ScenarioFile& scenario, const SimulationResult& result);
std::string ksep_summary_json(const ScenarioFile& scenario, const KsepResult& result);
std::string sweep_summary_json(const ScenarioFile& scenario,
                               const std::vector<KsepResult>& results);

/// Minimal SVG: the separation series against physical time on a
/// logarithmic vertical axis, one polyline per series.
std::string ksep_svg(const std::vector<const KsepSeries*>& series,
                     const std::vector<std::string>& labels);

/// Minimal SVG: orthographic view of 3D polylines (fiber projections).
/// Polylines are split at projection singularities by the caller.
std::string polyline3_svg(const std::vector<std::vector<Vec3>>& polylines);

}  // namespace ksreg
