#include "ksreg/gbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ksreg {

namespace {

constexpr double kSafety = 0.9;
constexpr double kShrinkMin = 0.1;
constexpr double kGrowthMax = 4.0;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

double scaled_diff_norm(const std::vector<double>& y0, const std::vector<double>& ynew,
                        const std::vector<double>& yprev, double rtol, double atol) {
    double acc = 0.0;
    const std::size_t n = y0.size();
    for (std::size_t c = 0; c < n; ++c) {
        const double scale = atol + rtol * std::max(std::abs(y0[c]), std::abs(ynew[c]));
        const double q = (ynew[c] - yprev[c]) / scale;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(tolerance >= 1e-15 && tolerance <= 1e-3))
        throw std::invalid_argument("IntegratorConfig: tolerance must be in [1e-15, 1e-3]");
    if (max_order < 4 || max_order > 16 || max_order % 2 != 0)
        throw std::invalid_argument("IntegratorConfig: max_order must be even and in [4, 16]");
    if (!(abs_floor > 0.0)) throw std::invalid_argument("IntegratorConfig: abs_floor must be > 0");
    if (!(initial_step > 0.0))
        throw std::invalid_argument("IntegratorConfig: initial_step must be > 0");
    if (!(checkpoint_spacing > 0.0))
        throw std::invalid_argument("IntegratorConfig: checkpoint_spacing must be > 0");
    if (max_steps == 0) throw std::invalid_argument("IntegratorConfig: max_steps must be >= 1");
}

struct GbsIntegrator::Workspace {
    Workspace(std::size_t n, int kmax)
        : f0(n), fm(n), zp(n), zc(n), zn(n), mid(n), ynew(n),
          prev(static_cast<std::size_t>(kmax) + 1, std::vector<double>(n)),
          curr(static_cast<std::size_t>(kmax) + 1, std::vector<double>(n)) {}

    std::vector<double> f0, fm, zp, zc, zn, mid, ynew;
    std::vector<std::vector<double>> prev, curr;  // extrapolation rows, 1-based
    bool f0_valid = false;
};

// Adaptive macro-stepping toward exact targets. Controller state (step
// size and target order) persists across targets of one Stepper.
struct GbsIntegrator::Stepper {
    const GbsIntegrator& g;
    Workspace ws;
    std::size_t attempts = 0;
    double h_next;
    int k_targ;

    Stepper(const GbsIntegrator& g, std::size_t dim)
        : g(g), ws(dim, g.kmax_), h_next(g.config_.initial_step) {
        const int guess = 2 + static_cast<int>(-std::log10(g.config_.tolerance) / 2.0);
        k_targ = std::clamp(guess, 2, g.kmax_);
    }

    void advance(std::vector<double>& y, double& s, double s_target) {
        if (s_target < s) throw std::out_of_range("gbs: cannot integrate backwards");
        while (s < s_target) {
            const double remaining = s_target - s;
            const bool clamped = h_next > remaining;
            const double H = clamped ? remaining : h_next;
            if (s + H == s)
                throw IntegrationError(IntegrationError::Kind::StepUnderflow,
                                       "gbs: step size underflow at s = " + std::to_string(s), s, y);
            if (++attempts > g.config_.max_steps)
                throw IntegrationError(IntegrationError::Kind::MaxSteps,
                                       "gbs: max step count exceeded at s = " + std::to_string(s),
                                       s, y);
            if (!ws.f0_valid) {
                g.rhs_(s, y, ws.f0);
                ws.f0_valid = true;
            }
            const int jmax = std::min(g.kmax_, k_targ + 1);
            std::vector<double> fac(static_cast<std::size_t>(jmax) + 1, kShrinkMin);
            std::vector<double> errs(static_cast<std::size_t>(jmax) + 1,
                                     std::numeric_limits<double>::infinity());
            int k_acc = 0;
            if (!g.attempt_step(ws, s, y, H, k_acc, ws.ynew, fac, errs)) {
                h_next = H * fac[static_cast<std::size_t>(jmax)];
                continue;
            }
            y = ws.ynew;
            s = clamped ? s_target : s + H;
            ws.f0_valid = false;
            if (!clamped) update_controller(H, k_acc, fac, errs);
        }
    }

    void update_controller(double H, int k, const std::vector<double>& fac,
                           const std::vector<double>& errs) {
        int k_new = k;
        double h_new = H * fac[static_cast<std::size_t>(k)];
        if (k >= 3) {
            const double w_lo =
                g.work_[static_cast<std::size_t>(k - 1)] / fac[static_cast<std::size_t>(k - 1)];
            const double w_hi =
                g.work_[static_cast<std::size_t>(k)] / fac[static_cast<std::size_t>(k)];
            if (w_lo < 0.9 * w_hi) {
                k_new = k - 1;
                h_new = H * fac[static_cast<std::size_t>(k - 1)];
            } else if (w_hi < 0.9 * w_lo && k < g.kmax_) {
                k_new = k + 1;
                h_new = H * fac[static_cast<std::size_t>(k)] *
                        (g.work_[static_cast<std::size_t>(k + 1)] /
                         g.work_[static_cast<std::size_t>(k)]);
            }
        } else if (k == 2 && k < g.kmax_ && errs[2] <= 0.1) {
            k_new = 3;  // converged too easily at the bottom of the table
        }
        h_next = std::min(h_new, kGrowthMax * H);
        k_targ = std::clamp(k_new, 2, g.kmax_);
    }
};

GbsIntegrator::GbsIntegrator(OdeRhs rhs, IntegratorConfig config)
    : rhs_(std::move(rhs)), config_(config) {
    config_.validate();
    kmax_ = config_.max_order / 2;
    nseq_.assign(static_cast<std::size_t>(kmax_) + 2, 0);
    for (int j = 1; j <= kmax_ + 1; ++j) nseq_[static_cast<std::size_t>(j)] = 2 * j;
    work_.assign(static_cast<std::size_t>(kmax_) + 2, 0.0);
    work_[1] = nseq_[1] + 1.0;
    for (int j = 2; j <= kmax_ + 1; ++j)
        work_[static_cast<std::size_t>(j)] =
            work_[static_cast<std::size_t>(j - 1)] + nseq_[static_cast<std::size_t>(j)];
}

void GbsIntegrator::midpoint(Workspace& ws, double s0, const std::vector<double>& y0,
                             const std::vector<double>& f0, double H, int nsteps,
                             std::vector<double>& out) const {
    const std::size_t n = y0.size();
    const double h = H / nsteps;
    ws.zp = y0;
    for (std::size_t c = 0; c < n; ++c) ws.zc[c] = y0[c] + h * f0[c];
    for (int m = 1; m < nsteps; ++m) {
        rhs_(s0 + m * h, ws.zc, ws.fm);
        for (std::size_t c = 0; c < n; ++c) ws.zn[c] = ws.zp[c] + 2.0 * h * ws.fm[c];
        std::swap(ws.zp, ws.zc);
        std::swap(ws.zc, ws.zn);
    }
    rhs_(s0 + H, ws.zc, ws.fm);
    // Gragg smoothing step
    for (std::size_t c = 0; c < n; ++c) out[c] = 0.5 * (ws.zc[c] + ws.zp[c] + h * ws.fm[c]);
}

bool GbsIntegrator::attempt_step(Workspace& ws, double s, const std::vector<double>& y, double H,
                                 int& k_accepted, std::vector<double>& y_out,
                                 std::vector<double>& fac, std::vector<double>& err_by_row) const {
    const std::size_t n = y.size();
    const int jmax = static_cast<int>(fac.size()) - 1;
    for (int j = 1; j <= jmax; ++j) {
        midpoint(ws, s, y, ws.f0, H, nseq_[static_cast<std::size_t>(j)], ws.mid);
        ws.curr[1] = ws.mid;
        for (int k = 1; k <= j - 1; ++k) {
            const double r = static_cast<double>(nseq_[static_cast<std::size_t>(j)]) /
                             static_cast<double>(nseq_[static_cast<std::size_t>(j - k)]);
            const double den = r * r - 1.0;
            const auto& lo = ws.curr[static_cast<std::size_t>(k)];
            const auto& pl = ws.prev[static_cast<std::size_t>(k)];
            auto& hi = ws.curr[static_cast<std::size_t>(k + 1)];
            for (std::size_t c = 0; c < n; ++c) hi[c] = lo[c] + (lo[c] - pl[c]) / den;
        }
        if (j >= 2) {
            const double err = scaled_diff_norm(y, ws.curr[static_cast<std::size_t>(j)],
                                                ws.curr[static_cast<std::size_t>(j - 1)],
                                                config_.tolerance, config_.abs_floor);
            err_by_row[static_cast<std::size_t>(j)] = err;
            if (std::isfinite(err)) {
                const double f = kSafety * std::pow(err, -1.0 / (2.0 * j - 1.0));
                fac[static_cast<std::size_t>(j)] = std::clamp(f, kShrinkMin, kGrowthMax);
                if (err <= 1.0) {
                    k_accepted = j;
                    y_out = ws.curr[static_cast<std::size_t>(j)];
                    return true;
                }
            } else {
                // derivative blow-up inside the step; force a hard shrink
                fac[static_cast<std::size_t>(j)] = kShrinkMin;
            }
        }
        for (int k = 1; k <= j; ++k)
            std::swap(ws.prev[static_cast<std::size_t>(k)], ws.curr[static_cast<std::size_t>(k)]);
    }
    return false;
}

Trajectory GbsIntegrator::integrate(const std::vector<double>& y0, double s_end, int time_index,
                                    double stop_time) const {
    if (s_end < 0.0) throw std::invalid_argument("gbs: s_end must be >= 0");
    Trajectory traj;
    traj.time_index = time_index;
    traj.s.push_back(0.0);
    traj.states.push_back(y0);
    const bool use_stop =
        time_index >= 0 && stop_time >= 0.0;
    if (s_end == 0.0) return traj;
    if (use_stop && y0[static_cast<std::size_t>(time_index)] >= stop_time) return traj;

    Stepper st(*this, y0.size());
    std::vector<double> y = y0;
    double s = 0.0;
    const double ds = config_.checkpoint_spacing;
    for (std::size_t i = 1;; ++i) {
        const double target = std::min(static_cast<double>(i) * ds, s_end);
        st.advance(y, s, target);
        traj.s.push_back(s);
        traj.states.push_back(y);
        if (use_stop && y[static_cast<std::size_t>(time_index)] >= stop_time) break;
        if (s >= s_end) break;
    }
    return traj;
}

std::vector<double> GbsIntegrator::sample_at_s(const Trajectory& traj, double s_star) const {
    if (traj.size() == 0) throw std::out_of_range("sample_at_s: empty trajectory");
    if (s_star < traj.s.front() || s_star > traj.s.back())
        throw std::out_of_range("sample_at_s: s outside trajectory range");
    const auto it = std::lower_bound(traj.s.begin(), traj.s.end(), s_star);
    if (it != traj.s.end() && *it == s_star)
        return traj.states[static_cast<std::size_t>(it - traj.s.begin())];
    const std::size_t base = static_cast<std::size_t>(it - traj.s.begin()) - 1;

    Stepper st(*this, traj.states[base].size());
    std::vector<double> y = traj.states[base];
    double s = traj.s[base];
    st.advance(y, s, s_star);
    return y;
}

double GbsIntegrator::locate_t(const Trajectory& traj, double t_star) const {
    return locate_t_state(traj, t_star).first;
}

std::pair<double, std::vector<double>> GbsIntegrator::locate_t_state(const Trajectory& traj,
                                                                     double t_star) const {
    if (!traj.has_time()) throw std::logic_error("locate_t: trajectory has no time component");
    const std::size_t n = traj.size();
    if (n == 0) throw std::out_of_range("locate_t: empty trajectory");
    const double t0 = traj.time_at(0);
    const double tN = traj.time_at(n - 1);
    if (t_star < t0 || t_star > tN) throw std::out_of_range("locate_t: t outside trajectory range");
    const double tol = 1e-12 * std::max(1.0, std::abs(t_star));

    // bracket over checkpoints (t is strictly increasing)
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (traj.time_at(mid) <= t_star)
            lo = mid;
        else
            hi = mid;
    }
    if (std::abs(traj.time_at(lo) - t_star) <= tol) return {traj.s[lo], traj.states[lo]};
    if (std::abs(traj.time_at(hi) - t_star) <= tol) return {traj.s[hi], traj.states[hi]};

    const std::size_t ti = static_cast<std::size_t>(traj.time_index);
    auto eval = [&](double s_probe) {
        Stepper st(*this, traj.states[lo].size());
        std::vector<double> y = traj.states[lo];
        double s = traj.s[lo];
        st.advance(y, s, s_probe);
        return std::pair<double, std::vector<double>>{y[ti] - t_star, std::move(y)};
    };

    // safeguarded secant (Illinois) on the re-integrated segment
    double a = traj.s[lo], b = traj.s[hi];
    double fa = traj.time_at(lo) - t_star, fb = traj.time_at(hi) - t_star;
    for (int iter = 0; iter < 200; ++iter) {
        double sp = b - fb * (b - a) / (fb - fa);
        if (!(sp > a && sp < b)) sp = 0.5 * (a + b);
        auto [fp, yp] = eval(sp);
        if (std::abs(fp) <= tol) return {sp, std::move(yp)};
        if (fp > 0.0) {
            b = sp;
            fb = fp;
            fa *= 0.5;
        } else {
            a = sp;
            fa = fp;
            fb *= 0.5;
        }
    }
    throw std::runtime_error("locate_t: root refinement failed to converge");
}

EventScan GbsIntegrator::locate_crossings(const Trajectory& traj,
                                          const std::function<double(std::span<const double>)>& g,
                                          double refine_tol) const {
    EventScan scan;
    const std::size_t n = traj.size();
    if (n < 2) return scan;
    std::vector<double> gv(n);
    double gmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        gv[i] = g(traj.states[i]);
        gmax = std::max(gmax, std::abs(gv[i]));
    }
    const double graze_tol = 1e-6 * std::max(gmax, 1e-300);

    auto refine = [&](std::size_t i) {
        auto eval = [&](double s_probe) {
            Stepper st(*this, traj.states[i].size());
            std::vector<double> y = traj.states[i];
            double s = traj.s[i];
            st.advance(y, s, s_probe);
            return std::pair<double, std::vector<double>>{g(y), std::move(y)};
        };
        double a = traj.s[i], b = traj.s[i + 1];
        double fa = gv[i], fb = gv[i + 1];
        const int dir = sign_of(fb);
        double s_best = a, f_best = fa;
        std::vector<double> y_best = traj.states[i];
        for (int iter = 0; iter < 200; ++iter) {
            double sp = b - fb * (b - a) / (fb - fa);
            if (!(sp > a && sp < b)) sp = 0.5 * (a + b);
            auto [fp, yp] = eval(sp);
            if (std::abs(fp) < std::abs(f_best)) {
                f_best = fp;
                s_best = sp;
                y_best = yp;
            }
            if (std::abs(fp) <= refine_tol) return EventCrossing{sp, std::move(yp), dir};
            if (sign_of(fp) == sign_of(fb)) {
                b = sp;
                fb = fp;
                fa *= 0.5;
            } else {
                a = sp;
                fa = fp;
                fb *= 0.5;
            }
        }
        return EventCrossing{s_best, std::move(y_best), dir};
    };

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (gv[i] == 0.0) {
            // exact touch at a checkpoint: a crossing only if the sign flips across it
            if (i > 0 && gv[i + 1] != 0.0 && sign_of(gv[i + 1]) != sign_of(gv[i - 1]))
                scan.crossings.push_back(EventCrossing{traj.s[i], traj.states[i], sign_of(gv[i + 1])});
            continue;
        }
        if (gv[i] * gv[i + 1] < 0.0) {
            scan.crossings.push_back(refine(i));
        } else if (i > 0 && std::abs(gv[i]) < graze_tol && std::abs(gv[i]) <= std::abs(gv[i - 1]) &&
                   std::abs(gv[i]) <= std::abs(gv[i + 1]) &&
                   sign_of(gv[i - 1]) == sign_of(gv[i + 1])) {
            scan.grazing_s.push_back(traj.s[i]);
        }
    }
    return scan;
}

std::vector<std::vector<double>> GbsIntegrator::extrapolation_diagonal(
    const std::vector<double>& y0, double s0, double H) const {
    Workspace ws(y0.size(), kmax_);
    rhs_(s0, y0, ws.f0);
    std::vector<std::vector<double>> diag;
    for (int j = 1; j <= kmax_; ++j) {
        midpoint(ws, s0, y0, ws.f0, H, nseq_[static_cast<std::size_t>(j)], ws.mid);
        ws.curr[1] = ws.mid;
        for (int k = 1; k <= j - 1; ++k) {
            const double r = static_cast<double>(nseq_[static_cast<std::size_t>(j)]) /
                             static_cast<double>(nseq_[static_cast<std::size_t>(j - k)]);
            const double den = r * r - 1.0;
            const auto& lo = ws.curr[static_cast<std::size_t>(k)];
            const auto& pl = ws.prev[static_cast<std::size_t>(k)];
            auto& hi = ws.curr[static_cast<std::size_t>(k + 1)];
            for (std::size_t c = 0; c < y0.size(); ++c) hi[c] = lo[c] + (lo[c] - pl[c]) / den;
        }
        diag.push_back(ws.curr[static_cast<std::size_t>(j)]);
        for (int k = 1; k <= j; ++k)
            std::swap(ws.prev[static_cast<std::size_t>(k)], ws.curr[static_cast<std::size_t>(k)]);
    }
    return diag;
}

}  // namespace ksreg
