#include "ksreg/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace ksreg {

KsepSeries k_separation(const PairSystem& system, const Trajectory& reference,
                        const Trajectory& test, double vartheta) {
    if (reference.size() != test.size())
        throw std::invalid_argument("k_separation: checkpoint grids differ in length");
    for (std::size_t i = 0; i < reference.size(); ++i)
        if (reference.s[i] != test.s[i])
            throw std::invalid_argument("k_separation: checkpoint grids are not aligned");

    KsepSeries series;
    series.vartheta = vartheta;
    series.samples.reserve(reference.size());
    const int np = system.pair_count();
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const RegState a = system.unpack(reference.states[i]);
        const RegState b = system.unpack(test.states[i]);
        double acc = 0.0;
        for (int k = 0; k < np; ++k) {
            const double angle = system.pair_rotation_sign(k) * vartheta;
            const KSVec expected = fiber_rotate(a.pairs[static_cast<std::size_t>(k)].u, angle);
            const KSVec d = b.pairs[static_cast<std::size_t>(k)].u - expected;
            acc += radius(d);
        }
        series.samples.push_back(KsepSample{reference.s[i], a.t, std::sqrt(acc)});
    }
    return series;
}

GammaFit fit_gamma(const KsepSeries& series, double d_low, double d_high) {
    std::vector<const KsepSample*> sel;
    for (const auto& smp : series.samples)
        if (smp.d >= d_low && smp.d <= d_high && smp.d > 0.0) sel.push_back(&smp);
    if (sel.size() < 10)
        throw FitError("fit_gamma: fewer than 10 samples inside the fit window");
    double dmin = sel.front()->d, dmax = sel.front()->d;
    for (const auto* p : sel) {
        dmin = std::min(dmin, p->d);
        dmax = std::max(dmax, p->d);
    }
    if (dmax < 10.0 * dmin)
        throw FitError("fit_gamma: no exponential regime inside the fit window");

    auto slope = [&](auto abscissa) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(sel.size());
        for (const auto* p : sel) {
            const double xv = abscissa(*p);
            const double yv = std::log(p->d);
            sx += xv;
            sy += yv;
            sxx += xv * xv;
            sxy += xv * yv;
        }
        const double denom = n * sxx - sx * sx;
        const double m = (n * sxy - sx * sy) / denom;
        const double b = (sy - m * sx) / n;
        double res = 0;
        for (const auto* p : sel) {
            const double e = std::log(p->d) - (m * abscissa(*p) + b);
            res += e * e;
        }
        return std::pair<double, double>{m, std::sqrt(res / n)};
    };
    const auto [gt, rt] = slope([](const KsepSample& p) { return p.t; });
    const auto [gs, rs] = slope([](const KsepSample& p) { return p.s; });
    (void)rs;
    return GammaFit{gt, gs, rt, static_cast<int>(sel.size())};
}

double estimate_tcr(double gamma_t, double eps) {
    if (!(gamma_t > 0.0)) throw std::invalid_argument("estimate_tcr: gamma must be > 0");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("estimate_tcr: eps must be in (0, 1)");
    return -std::log(eps) / gamma_t;
}

double estimate_tolerance(double gamma_t, double t_f) {
    if (!(gamma_t > 0.0)) throw std::invalid_argument("estimate_tolerance: gamma must be > 0");
    if (!(t_f >= 0.0)) throw std::invalid_argument("estimate_tolerance: t_f must be >= 0");
    return std::exp(-gamma_t * t_f);
}

std::optional<double> detect_transition(const KsepSeries& series) {
    for (std::size_t i = 0; i < series.samples.size(); ++i) {
        const auto& cur = series.samples[i];
        if (cur.d < 1.0) continue;
        if (i == 0 || series.samples[i - 1].d <= 0.0) return cur.t;
        const auto& prev = series.samples[i - 1];
        // linear interpolation in ln d between the bracketing samples
        const double la = std::log(prev.d);
        const double lb = std::log(cur.d);
        if (lb == la) return cur.t;
        const double f = (0.0 - la) / (lb - la);
        return prev.t + f * (cur.t - prev.t);
    }
    return std::nullopt;
}

namespace {

// parameterized fiber points at the quadrature nodes, anchored at theta_ref
std::vector<KSVec> fiber_nodes(const Vec3& x, double theta_ref, int n_nodes) {
    const KSVec gen = ks_inverse(x, theta_ref);
    const double sign = static_cast<double>(branch_sign(x));
    std::vector<KSVec> nodes(static_cast<std::size_t>(n_nodes));
    for (int j = 0; j < n_nodes; ++j)
        nodes[static_cast<std::size_t>(j)] = fiber_rotate(gen, sign * (2.0 * M_PI * j / n_nodes));
    return nodes;
}

}  // namespace

double fiber_distance(const Vec3& x1, const Vec3& x2, double theta_ref, int n_nodes) {
    if (n_nodes < 1) throw std::invalid_argument("fiber_distance: n_nodes must be >= 1");
    const auto a = fiber_nodes(x1, theta_ref, n_nodes);
    const auto b = fiber_nodes(x2, theta_ref, n_nodes);
    // periodic integrand: the trapezoid rule reduces to the node average
    double acc = 0.0;
    for (int j = 0; j < n_nodes; ++j)
        acc += norm(a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]);
    return acc / n_nodes;
}

double manifold_distance(const PairSystem& system, const GbsIntegrator& integrator,
                         const Trajectory& a, const Trajectory& b, double t, double theta_ref,
                         int n_nodes) {
    if (n_nodes < 1) throw std::invalid_argument("manifold_distance: n_nodes must be >= 1");
    const RegState sa = system.unpack(integrator.locate_t_state(a, t).second);
    const RegState sb = system.unpack(integrator.locate_t_state(b, t).second);
    const int np = system.pair_count();
    std::vector<std::vector<KSVec>> na(static_cast<std::size_t>(np)), nb(static_cast<std::size_t>(np));
    for (int k = 0; k < np; ++k) {
        na[static_cast<std::size_t>(k)] =
            fiber_nodes(ks_map(sa.pairs[static_cast<std::size_t>(k)].u), theta_ref, n_nodes);
        nb[static_cast<std::size_t>(k)] =
            fiber_nodes(ks_map(sb.pairs[static_cast<std::size_t>(k)].u), theta_ref, n_nodes);
    }
    double acc = 0.0;
    for (int j = 0; j < n_nodes; ++j) {
        double sq = 0.0;
        for (int k = 0; k < np; ++k)
            sq += radius(na[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] -
                         nb[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
        acc += std::sqrt(sq);
    }
    return acc / n_nodes;
}

PoincareResult poincare(const PairSystem& system, const GbsIntegrator& integrator,
                        const Trajectory& traj, const Plane& plane, const SectionSelector& sel,
                        double theta_ref, int n_nodes) {
    if (norm2(plane.normal) == 0.0) throw std::invalid_argument("poincare: zero plane normal");

    auto section_point = [&](std::span<const double> y) -> Vec3 {
        const RegState st = system.unpack(y);
        if (sel.kind == SectionSelector::Kind::Pair)
            return ks_map(st.pairs[static_cast<std::size_t>(sel.index)].u);
        return system.reconstruct(st).positions[static_cast<std::size_t>(sel.index)];
    };
    auto g = [&](std::span<const double> y) {
        return dot(plane.normal, section_point(y) - plane.point);
    };

    // the recorded fiber follows the selected pair; a body selector uses
    // the pair it forms with the lowest other index
    int fiber_pair = sel.index;
    if (sel.kind == SectionSelector::Kind::Body) {
        const int other = sel.index == 0 ? 1 : 0;
        fiber_pair = system.pair_index(std::min(sel.index, other), std::max(sel.index, other));
    }

    const EventScan scan = integrator.locate_crossings(traj, g);
    PoincareResult out;
    out.grazing_s = scan.grazing_s;
    if (scan.crossings.empty()) return out;
    const int map_direction = scan.crossings.front().direction;

    std::optional<Vec3> first_x, prev_x;
    int n = 0;
    for (const auto& c : scan.crossings) {
        if (c.direction != map_direction) continue;  // one-sided return map
        const RegState st = system.unpack(c.state);
        const Vec3 x = ks_map(st.pairs[static_cast<std::size_t>(fiber_pair)].u);
        FiberCrossing fc;
        fc.n = ++n;
        fc.s = c.s;
        fc.t = st.t;
        fc.generator = ks_inverse(x, theta_ref);
        fc.dist_prev = prev_x ? fiber_distance(*prev_x, x, theta_ref, n_nodes) : 0.0;
        fc.dist_first = first_x ? fiber_distance(*first_x, x, theta_ref, n_nodes) : 0.0;
        if (!first_x) first_x = x;
        prev_x = x;
        out.crossings.push_back(fc);
    }
    return out;
}

std::vector<DriftSample> energy_drift(const PairSystem& system, const Trajectory& traj) {
    if (traj.size() == 0) return {};
    const double e0 = system.energy(system.unpack(traj.states[0]));
    if (e0 == 0.0) throw std::invalid_argument("energy_drift: zero initial energy");
    std::vector<DriftSample> out;
    out.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const RegState st = system.unpack(traj.states[i]);
        out.push_back(DriftSample{st.t, (system.energy(st) - e0) / e0});
    }
    return out;
}

std::optional<double> detect_escape(const PairSystem& system, const Trajectory& traj) {
    const int n = system.body_count();
    const double far = 10.0 * system.initial_diameter();
    const double mtot = system.total_mass();

    struct Candidate {
        bool is_pair;
        int i, j;                    // j unused for single bodies
        double streak_start = 0.0;   // t when the energy turned positive
        int streak_len = 0;          // consecutive checkpoints with both conditions
        bool positive = false;
    };
    std::vector<Candidate> cands;
    for (int i = 0; i < n; ++i) cands.push_back(Candidate{false, i, -1, 0.0, 0, false});
    if (n >= 3)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) cands.push_back(Candidate{true, i, j, 0.0, 0, false});

    for (std::size_t ci = 0; ci < traj.size(); ++ci) {
        const RegState st = system.unpack(traj.states[ci]);
        const CartesianState cart = system.reconstruct(st);
        for (auto& c : cands) {
            double m_c;
            Vec3 q_c, v_c;
            bool bound_internally = true;
            if (!c.is_pair) {
                m_c = system.mass(c.i);
                q_c = cart.positions[static_cast<std::size_t>(c.i)];
                v_c = cart.velocities[static_cast<std::size_t>(c.i)];
            } else {
                const double mi = system.mass(c.i), mj = system.mass(c.j);
                m_c = mi + mj;
                q_c = (1.0 / m_c) * (mi * cart.positions[static_cast<std::size_t>(c.i)] +
                                     mj * cart.positions[static_cast<std::size_t>(c.j)]);
                v_c = (1.0 / m_c) * (mi * cart.velocities[static_cast<std::size_t>(c.i)] +
                                     mj * cart.velocities[static_cast<std::size_t>(c.j)]);
                const Vec3 dq = cart.positions[static_cast<std::size_t>(c.i)] -
                                cart.positions[static_cast<std::size_t>(c.j)];
                const Vec3 dv = cart.velocities[static_cast<std::size_t>(c.i)] -
                                cart.velocities[static_cast<std::size_t>(c.j)];
                const double mu_int = mi * mj / m_c;
                bound_internally = 0.5 * mu_int * norm2(dv) - mi * mj / norm(dq) < 0.0;
            }
            const double m_rest = mtot - m_c;
            // two-body energy against the remaining bodies collapsed to their barycenter
            const Vec3 q_rest = (-m_c / m_rest) * q_c;  // total barycenter at the origin
            const Vec3 v_rest = (-m_c / m_rest) * v_c;
            const double mu = m_c * m_rest / mtot;
            const double e2 =
                0.5 * mu * norm2(v_c - v_rest) - m_c * m_rest / norm(q_c - q_rest);
            const bool pos = e2 > 0.0 && bound_internally;
            if (pos && !c.positive) c.streak_start = st.t;
            c.positive = pos;
            if (pos && norm(q_c) > far)
                ++c.streak_len;
            else
                c.streak_len = 0;
            if (c.streak_len >= 5) return c.streak_start;
        }
    }
    return std::nullopt;
}

double max_bilinear_defect(const PairSystem& system, const Trajectory& traj) {
    double worst = 0.0;
    for (const auto& y : traj.states) {
        const RegState st = system.unpack(y);
        for (const auto& p : st.pairs) worst = std::max(worst, std::abs(bilinear(p.u, p.w)));
    }
    return worst;
}

double max_consistency_defect(const PairSystem& system, const Trajectory& traj) {
    double worst = 0.0;
    for (const auto& y : traj.states)
        worst = std::max(worst, system.consistency_defect(system.unpack(y)));
    return worst;
}

}  // namespace ksreg
