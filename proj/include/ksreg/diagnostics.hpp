#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ksreg/gbs.hpp"
#include "ksreg/nbody_reg.hpp"

namespace ksreg {

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct KsepSample {
    double s = 0.0;
    double t = 0.0;  // physical time of the reference trajectory
    double d = 0.0;  // K-separation
};

/// Time series of the K-separation between a reference trajectory and a
/// trajectory started elsewhere on the same initial fiber.
struct KsepSeries {
    std::vector<KsepSample> samples;
    double vartheta = 0.0;
    double theta_ref = 0.0;
    double tolerance = 0.0;
    std::optional<double> gamma_t;
    std::optional<double> gamma_s;
    std::optional<double> t_cr;
    std::optional<double> t_esc;
};

/// K-separation of two trajectories on identical s-checkpoint grids:
/// per pair d_k = || u_test,k - R(+-vartheta) u_ref,k || with the pair's
/// frozen rotation sign, combined as sqrt(sum_k d_k^2). Zero (to
/// round-off) at s = 0 and, in exact arithmetic, for all s.
KsepSeries k_separation(const PairSystem& system, const Trajectory& reference,
                        const Trajectory& test, double vartheta);

struct GammaFit {
    double gamma_t = 0.0;
    double gamma_s = 0.0;
    double residual = 0.0;  // RMS residual of the ln d vs t fit
    int n_samples = 0;
};

/// Least-squares slope of ln d versus t (and versus s) over samples with
/// d inside [d_low, d_high]. Throws FitError when fewer than 10 samples
/// fall inside the window or the window spans no growth (no exponential
/// regime).
GammaFit fit_gamma(const KsepSeries& series, double d_low = 1e-10, double d_high = 1e-2);

/// Critical-time estimate -ln(eps)/gamma_t from a growth rate and an
/// integration tolerance.
double estimate_tcr(double gamma_t, double eps);

/// Tolerance needed to keep the integration trustworthy until t_f:
/// exp(-gamma_t t_f). Inverse of estimate_tcr.
double estimate_tolerance(double gamma_t, double t_f);

/// First time the separation reaches 1, by linear interpolation in ln d
/// between the bracketing samples; nullopt when never reached.
std::optional<double> detect_transition(const KsepSeries& series);

/// Average over the gauge angle of the distance between two fibers, both
/// parameterized from the common reference angle theta_ref:
/// (1/2pi) integral || w1(vartheta) - w2(vartheta) || dvartheta,
/// evaluated by the periodic trapezoid rule on n_nodes uniform nodes.
double fiber_distance(const Vec3& x1, const Vec3& x2, double theta_ref, int n_nodes = 64);

/// Distance between the fiber bundles of two trajectories at equal
/// physical time t: states are located with locate_t, each pair's fiber
/// re-anchored through theta_ref, and the concatenated parameterizations
/// compared under the quadrature above.
double manifold_distance(const PairSystem& system, const GbsIntegrator& integrator,
                         const Trajectory& a, const Trajectory& b, double t, double theta_ref,
                         int n_nodes = 64);

struct Plane {
    Vec3 normal;
    Vec3 point;
};

/// What the section condition is evaluated on: a body position from the
/// reconstructed state, or a pair's relative coordinate.
struct SectionSelector {
    enum class Kind { Body, Pair };
    Kind kind = Kind::Pair;
    int index = 0;
};

struct FiberCrossing {
    int n = 0;          // crossing index, 1-based
    double s = 0.0;
    double t = 0.0;
    KSVec generator;    // fiber generator re-anchored at theta_ref
    double dist_prev = 0.0;   // fiber distance to the previous crossing
    double dist_first = 0.0;  // fiber distance to the first crossing
};

struct PoincareResult {
    std::vector<FiberCrossing> crossings;
    std::vector<double> grazing_s;
};

/// Fiberized Poincare map: same-direction plane crossings of the selected
/// body or pair coordinate, each recorded as a fiber (every point of a
/// fiber crosses the extended section simultaneously). Distances between
/// crossing fibers use the static fiber metric. For a body selector the
/// recorded fiber is that of the pair formed with the lowest other index.
PoincareResult poincare(const PairSystem& system, const GbsIntegrator& integrator,
                        const Trajectory& traj, const Plane& plane, const SectionSelector& sel,
                        double theta_ref, int n_nodes = 64);

struct DriftSample {
    double t = 0.0;
    double drift = 0.0;  // (E - E0) / E0
};

/// Relative energy drift at every checkpoint. Requires E0 != 0.
std::vector<DriftSample> energy_drift(const PairSystem& system, const Trajectory& traj);

/// Escape detection: a body (or a bound pair treated as a composite) is
/// escaped once its barycentric distance exceeds 10x the initial system
/// diameter while its two-body energy against the remaining bodies has
/// been positive for at least 5 consecutive checkpoints. The reported
/// time is the start of that positive-energy streak, i.e. when the
/// candidate became unbound.
std::optional<double> detect_escape(const PairSystem& system, const Trajectory& traj);

/// Largest |l(u_k, w_k)| over all pairs and checkpoints.
double max_bilinear_defect(const PairSystem& system, const Trajectory& traj);

/// Largest consistency defect over all checkpoints.
double max_consistency_defect(const PairSystem& system, const Trajectory& traj);

}  // namespace ksreg
