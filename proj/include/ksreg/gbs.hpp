#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksreg {

/// Right-hand side of a first-order ODE system y' = f(s, y).
using OdeRhs = std::function<void(double s, std::span<const double> y, std::span<double> dydt)>;

struct IntegratorConfig {
    double tolerance = 1e-13;       ///< relative tolerance, per component
    double abs_floor = 1e-14;       ///< absolute floor in the error norm
    int max_order = 16;             ///< even, in [4, 16]
    double initial_step = 1e-2;     ///< first macro step in s
    std::size_t max_steps = 5'000'000;
    double checkpoint_spacing = 0.1;

    /// Throws std::invalid_argument on out-of-range settings.
    void validate() const;
};

/// Checkpointed solution samples over fictitious time s. When the system
/// carries physical time as a state component, `time_index` names it and
/// both s and t are strictly monotone.
struct Trajectory {
    std::vector<double> s;
    std::vector<std::vector<double>> states;
    int time_index = -1;

    std::size_t size() const { return s.size(); }
    const std::vector<double>& state(std::size_t i) const { return states[i]; }
    double time_at(std::size_t i) const { return states[i][static_cast<std::size_t>(time_index)]; }
    bool has_time() const { return time_index >= 0; }
};

/// Integration failure (step-size underflow or step budget exceeded),
/// carrying the last valid sample.
class IntegrationError : public std::runtime_error {
public:
    enum class Kind { StepUnderflow, MaxSteps };

    IntegrationError(Kind kind, std::string msg, double last_s, std::vector<double> last_state)
        : std::runtime_error(std::move(msg)), kind(kind), last_s(last_s),
          last_state(std::move(last_state)) {}

    Kind kind;
    double last_s;
    std::vector<double> last_state;
};

/// A located zero of an event function along a trajectory.
struct EventCrossing {
    double s = 0.0;
    std::vector<double> state;
    int direction = 0;  ///< sign of the event function after the crossing
};

struct EventScan {
    std::vector<EventCrossing> crossings;
    std::vector<double> grazing_s;  ///< checkpoint s of near-tangential approaches
};

/// Gragg-Bulirsch-Stoer extrapolation integrator: modified-midpoint base
/// method over the even step-number sequence 2,4,6,... with polynomial
/// (Aitken-Neville) extrapolation, adaptive step and order. Integrations
/// are deterministic: identical inputs produce bitwise-identical output.
class GbsIntegrator {
public:
    GbsIntegrator(OdeRhs rhs, IntegratorConfig config);

    const IntegratorConfig& config() const { return config_; }

    /// Integrate from s = 0, emitting checkpoints at the configured
    /// spacing (each reached by stepping exactly onto the checkpoint).
    /// Stops at s_end, or earlier at the first checkpoint whose time
    /// component reaches stop_time (if stop_time >= 0 and time_index
    /// is set). s_end = 0 yields a trajectory holding only y0.
    Trajectory integrate(const std::vector<double>& y0, double s_end, int time_index = -1,
                         double stop_time = -1.0) const;

    /// State at s_star: the stored checkpoint when s_star is one,
    /// otherwise re-integration from the nearest earlier checkpoint.
    /// Throws std::out_of_range outside the trajectory range.
    std::vector<double> sample_at_s(const Trajectory& traj, double s_star) const;

    /// Solve t(s) = t_star on a trajectory with a time component, by
    /// bracketing over checkpoints and a safeguarded secant on
    /// re-integrated segments. |t(s*) - t_star| <= 1e-12 max(1, |t_star|).
    double locate_t(const Trajectory& traj, double t_star) const;

    /// As locate_t but also returns the state at the located s.
    std::pair<double, std::vector<double>> locate_t_state(const Trajectory& traj,
                                                          double t_star) const;

    /// All sign changes of g(state) over the trajectory, refined until
    /// |g| <= refine_tol. Near-tangential approaches that do not cross
    /// are reported as grazing warnings, not crossings.
    EventScan locate_crossings(const Trajectory& traj,
                               const std::function<double(std::span<const double>)>& g,
                               double refine_tol = 1e-10) const;

    /// Extrapolation-table diagonal for a single macro step of size H
    /// from y0 (diagnostic hook for convergence studies).
    std::vector<std::vector<double>> extrapolation_diagonal(const std::vector<double>& y0,
                                                            double s0, double H) const;

private:
    struct Workspace;
    struct Stepper;

    bool attempt_step(Workspace& ws, double s, const std::vector<double>& y, double H,
                      int& k_accepted, std::vector<double>& y_out, std::vector<double>& fac,
                      std::vector<double>& err_by_row) const;
    void midpoint(Workspace& ws, double s0, const std::vector<double>& y0,
                  const std::vector<double>& f0, double H, int nsteps,
                  std::vector<double>& out) const;

    OdeRhs rhs_;
    IntegratorConfig config_;
    int kmax_;                      // number of extrapolation rows
    std::vector<int> nseq_;         // substep counts 2, 4, 6, ...
    std::vector<double> work_;      // cumulative evaluations per row
};

}  // namespace ksreg
