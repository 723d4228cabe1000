#include "ksreg/nbody_reg.hpp"

#include <cmath>
#include <string>

namespace ksreg {

void BodySet::validate() const {
    if (bodies.size() < 2) throw std::invalid_argument("BodySet: at least two bodies required");
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        if (!(bodies[i].mass > 0.0))
            throw std::invalid_argument("BodySet: body " + std::to_string(i) +
                                        " has non-positive mass");
    }
}

PairSystem::PairSystem(BodySet set) {
    set.validate();
    const int n = static_cast<int>(set.bodies.size());
    masses_.reserve(static_cast<std::size_t>(n));
    for (const auto& b : set.bodies) masses_.push_back(b.mass);
    total_mass_ = 0.0;
    for (double m : masses_) total_mass_ += m;

    // shift to the barycentric frame
    Vec3 com, cov;
    for (const auto& b : set.bodies) {
        com += b.mass * b.position;
        cov += b.mass * b.velocity;
    }
    com = (1.0 / total_mass_) * com;
    cov = (1.0 / total_mass_) * cov;
    for (auto& b : set.bodies) {
        b.position -= com;
        b.velocity -= cov;
    }
    initial_ = std::move(set);

    pair_lookup_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const int k = static_cast<int>(pairs_.size());
            pairs_.emplace_back(i, j);
            pair_lookup_[static_cast<std::size_t>(i * n + j)] = k;
            pair_lookup_[static_cast<std::size_t>(j * n + i)] = k;
            const Vec3 x = initial_.bodies[static_cast<std::size_t>(i)].position -
                           initial_.bodies[static_cast<std::size_t>(j)].position;
            signs_.push_back(branch_sign(x));
            initial_diameter_ = std::max(initial_diameter_, norm(x));
        }
    }
}

int PairSystem::pair_index(int i, int j) const {
    const int n = body_count();
    return pair_lookup_[static_cast<std::size_t>(i * n + j)];
}

RegState PairSystem::init_state(std::span<const double> vartheta, double theta_ref) const {
    if (static_cast<int>(vartheta.size()) != pair_count())
        throw std::invalid_argument("init_state: one fiber angle per pair required");
    RegState state;
    state.t = 0.0;
    state.pairs.resize(static_cast<std::size_t>(pair_count()));
    for (int k = 0; k < pair_count(); ++k) {
        const auto [i, j] = pairs_[static_cast<std::size_t>(k)];
        const Vec3 x = initial_.bodies[static_cast<std::size_t>(i)].position -
                       initial_.bodies[static_cast<std::size_t>(j)].position;
        if (norm2(x) == 0.0)
            throw CollisionError("init_state: bodies " + std::to_string(i) + " and " +
                                 std::to_string(j) + " coincide");
        const Vec3 xdot = initial_.bodies[static_cast<std::size_t>(i)].velocity -
                          initial_.bodies[static_cast<std::size_t>(j)].velocity;
        const double angle = signs_[static_cast<std::size_t>(k)] * vartheta[static_cast<std::size_t>(k)];
        const KSVec u = fiber_rotate(ks_inverse(x, theta_ref), angle);
        state.pairs[static_cast<std::size_t>(k)] = PairState{u, velocity_inverse(u, xdot)};
    }
    return state;
}

RegState PairSystem::init_state(double vartheta, double theta_ref) const {
    const std::vector<double> angles(static_cast<std::size_t>(pair_count()), vartheta);
    return init_state(angles, theta_ref);
}

CartesianState PairSystem::reconstruct(const RegState& state) const {
    const int n = body_count();
    CartesianState cart;
    cart.t = state.t;
    cart.positions.assign(static_cast<std::size_t>(n), Vec3{});
    cart.velocities.assign(static_cast<std::size_t>(n), Vec3{});
    std::vector<Vec3> x(state.pairs.size()), xdot(state.pairs.size());
    for (std::size_t k = 0; k < state.pairs.size(); ++k) {
        x[k] = ks_map(state.pairs[k].u);
        xdot[k] = velocity_map(state.pairs[k].u, state.pairs[k].w);
    }
    for (int i = 0; i < n; ++i) {
        Vec3 qi, vi;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const int k = pair_index(i, j);
            const double sgn = i < j ? 1.0 : -1.0;
            qi += (sgn * masses_[static_cast<std::size_t>(j)]) * x[static_cast<std::size_t>(k)];
            vi += (sgn * masses_[static_cast<std::size_t>(j)]) * xdot[static_cast<std::size_t>(k)];
        }
        cart.positions[static_cast<std::size_t>(i)] = (1.0 / total_mass_) * qi;
        cart.velocities[static_cast<std::size_t>(i)] = (1.0 / total_mass_) * vi;
    }
    return cart;
}

double PairSystem::lagrangian(const RegState& state) const {
    const CartesianState cart = reconstruct(state);
    double kinetic = 0.0;
    for (int i = 0; i < body_count(); ++i)
        kinetic += 0.5 * masses_[static_cast<std::size_t>(i)] *
                   norm2(cart.velocities[static_cast<std::size_t>(i)]);
    double potential = 0.0;
    for (int k = 0; k < pair_count(); ++k) {
        const auto [i, j] = pairs_[static_cast<std::size_t>(k)];
        const double r = radius(state.pairs[static_cast<std::size_t>(k)].u);
        if (r == 0.0)
            throw CollisionError("lagrangian: collision singularity in pair " + std::to_string(k));
        potential += masses_[static_cast<std::size_t>(i)] * masses_[static_cast<std::size_t>(j)] / r;
    }
    return kinetic + potential;
}

double PairSystem::energy(const RegState& state) const {
    const CartesianState cart = reconstruct(state);
    double kinetic = 0.0;
    for (int i = 0; i < body_count(); ++i)
        kinetic += 0.5 * masses_[static_cast<std::size_t>(i)] *
                   norm2(cart.velocities[static_cast<std::size_t>(i)]);
    double potential = 0.0;
    for (int k = 0; k < pair_count(); ++k) {
        const auto [i, j] = pairs_[static_cast<std::size_t>(k)];
        potential += masses_[static_cast<std::size_t>(i)] * masses_[static_cast<std::size_t>(j)] /
                     radius(state.pairs[static_cast<std::size_t>(k)].u);
    }
    return kinetic - potential;
}

double PairSystem::consistency_defect(const RegState& state) const {
    const CartesianState cart = reconstruct(state);
    double worst = 0.0;
    for (int k = 0; k < pair_count(); ++k) {
        const auto [i, j] = pairs_[static_cast<std::size_t>(k)];
        const Vec3 d = ks_map(state.pairs[static_cast<std::size_t>(k)].u) -
                       (cart.positions[static_cast<std::size_t>(i)] -
                        cart.positions[static_cast<std::size_t>(j)]);
        worst = std::max(worst, norm(d));
    }
    return worst;
}

void PairSystem::rhs(std::span<const double> y, std::span<double> dydt) const {
    const int np = pair_count();
    const int n = body_count();

    // unpack pairwise coordinates and radii
    std::vector<KSVec> u(static_cast<std::size_t>(np)), w(static_cast<std::size_t>(np));
    std::vector<Vec3> x(static_cast<std::size_t>(np));
    std::vector<double> r(static_cast<std::size_t>(np));
    for (int k = 0; k < np; ++k) {
        const std::size_t o = 8 * static_cast<std::size_t>(k);
        u[static_cast<std::size_t>(k)] = KSVec{y[o], y[o + 1], y[o + 2], y[o + 3]};
        w[static_cast<std::size_t>(k)] = KSVec{y[o + 4], y[o + 5], y[o + 6], y[o + 7]};
        r[static_cast<std::size_t>(k)] = radius(u[static_cast<std::size_t>(k)]);
        if (r[static_cast<std::size_t>(k)] == 0.0)
            throw CollisionError("rhs: collision singularity in pair " + std::to_string(k));
        x[static_cast<std::size_t>(k)] = ks_map(u[static_cast<std::size_t>(k)]);
    }

    // Lambda = T + U; kinetic part from reconstructed barycentric velocities
    std::vector<Vec3> xdot(static_cast<std::size_t>(np));
    for (int k = 0; k < np; ++k) {
        const KSVec p = apply_ks_matrix(u[static_cast<std::size_t>(k)], w[static_cast<std::size_t>(k)]);
        const double f = 2.0 / r[static_cast<std::size_t>(k)];
        xdot[static_cast<std::size_t>(k)] = Vec3{f * p.u1, f * p.u2, f * p.u3};
    }
    double kinetic = 0.0;
    for (int i = 0; i < n; ++i) {
        Vec3 vi;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const int k = pair_index(i, j);
            const double sgn = i < j ? 1.0 : -1.0;
            vi += (sgn * masses_[static_cast<std::size_t>(j)]) * xdot[static_cast<std::size_t>(k)];
        }
        kinetic += 0.5 * masses_[static_cast<std::size_t>(i)] * norm2(vi) / (total_mass_ * total_mass_);
    }
    double potential = 0.0;
    for (int k = 0; k < np; ++k) {
        const auto [i, j] = pairs_[static_cast<std::size_t>(k)];
        potential += masses_[static_cast<std::size_t>(i)] * masses_[static_cast<std::size_t>(j)] /
                     r[static_cast<std::size_t>(k)];
    }
    const double lambda = kinetic + potential;

    // q_l - q_i through the pair table
    auto rel = [&](int i, int l) -> Vec3 {
        const int k = pair_index(i, l);
        return i < l ? -x[static_cast<std::size_t>(k)] : x[static_cast<std::size_t>(k)];
    };
    auto rel_r = [&](int i, int l) -> double {
        return r[static_cast<std::size_t>(pair_index(i, l))];
    };

    for (int k = 0; k < np; ++k) {
        const auto [i, j] = pairs_[static_cast<std::size_t>(k)];
        const std::size_t o = 8 * static_cast<std::size_t>(k);
        const double rk = r[static_cast<std::size_t>(k)];
        const KSVec& uk = u[static_cast<std::size_t>(k)];
        const KSVec& wk = w[static_cast<std::size_t>(k)];

        const double inv_rl = 1.0 / (rk * lambda);
        dydt[o] = wk.u1 * inv_rl;
        dydt[o + 1] = wk.u2 * inv_rl;
        dydt[o + 2] = wk.u3 * inv_rl;
        dydt[o + 3] = wk.u4 * inv_rl;

        Vec3 pk;
        for (int l = 0; l < n; ++l) {
            if (l == i || l == j) continue;
            const Vec3 dli = rel(i, l);
            const Vec3 dlj = rel(j, l);
            const double rli = rel_r(i, l);
            const double rlj = rel_r(j, l);
            pk += masses_[static_cast<std::size_t>(l)] *
                  ((1.0 / (rli * rli * rli)) * dli - (1.0 / (rlj * rlj * rlj)) * dlj);
        }
        const double mk = masses_[static_cast<std::size_t>(i)] + masses_[static_cast<std::size_t>(j)];
        const double two_body = (radius(wk) - 0.5 * mk) / (rk * rk);
        const KSVec pert = apply_ks_matrix_transpose(uk, KSVec{pk.x, pk.y, pk.z, 0.0});
        const double inv_l = 1.0 / lambda;
        dydt[o + 4] = (two_body * uk.u1 + 0.5 * pert.u1) * inv_l;
        dydt[o + 5] = (two_body * uk.u2 + 0.5 * pert.u2) * inv_l;
        dydt[o + 6] = (two_body * uk.u3 + 0.5 * pert.u3) * inv_l;
        dydt[o + 7] = (two_body * uk.u4 + 0.5 * pert.u4) * inv_l;
    }
    dydt[static_cast<std::size_t>(time_index())] = 1.0 / lambda;
}

OdeRhs PairSystem::rhs_function() const {
    return [this](double, std::span<const double> y, std::span<double> dydt) { rhs(y, dydt); };
}

std::vector<double> PairSystem::pack(const RegState& state) const {
    std::vector<double> y(static_cast<std::size_t>(dimension()));
    for (int k = 0; k < pair_count(); ++k) {
        const std::size_t o = 8 * static_cast<std::size_t>(k);
        const PairState& p = state.pairs[static_cast<std::size_t>(k)];
        y[o] = p.u.u1;
        y[o + 1] = p.u.u2;
        y[o + 2] = p.u.u3;
        y[o + 3] = p.u.u4;
        y[o + 4] = p.w.u1;
        y[o + 5] = p.w.u2;
        y[o + 6] = p.w.u3;
        y[o + 7] = p.w.u4;
    }
    y[static_cast<std::size_t>(time_index())] = state.t;
    return y;
}

RegState PairSystem::unpack(std::span<const double> y) const {
    RegState state;
    state.pairs.resize(static_cast<std::size_t>(pair_count()));
    for (int k = 0; k < pair_count(); ++k) {
        const std::size_t o = 8 * static_cast<std::size_t>(k);
        state.pairs[static_cast<std::size_t>(k)] =
            PairState{KSVec{y[o], y[o + 1], y[o + 2], y[o + 3]},
                      KSVec{y[o + 4], y[o + 5], y[o + 6], y[o + 7]}};
    }
    state.t = y[static_cast<std::size_t>(time_index())];
    return state;
}

}  // namespace ksreg
