#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ksreg/gbs.hpp"
#include "ksreg/ks_core.hpp"
#include "ksreg/vec.hpp"

namespace ksreg {

struct Body {
    double mass = 0.0;
    Vec3 position;
    Vec3 velocity;
};

/// Gravitating point masses, G = 1, dimensionless units.
struct BodySet {
    std::vector<Body> bodies;

    void validate() const;  // throws std::invalid_argument
};

/// Per-pair KS coordinates: u is the pair position in U^4, w the pair KS
/// velocity (1/2) L^T(u) Xdot. The bilinear form l(u, w) is a first
/// integral and stays at tolerance level along an integration.
struct PairState {
    KSVec u;
    KSVec w;
};

/// State of the regularized system: one PairState per unordered pair in
/// lexicographic order, plus physical time. The independent variable is
/// the global fictitious time s with dt/ds = 1/Lambda.
struct RegState {
    std::vector<PairState> pairs;
    double t = 0.0;
};

struct CartesianState {
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
    double t = 0.0;
};

/// The N-body problem in pairwise KS variables with a Lagrangian time
/// transformation: 8 N(N-1)/2 + 1 first-order equations. Construction
/// shifts the bodies to the barycentric frame and freezes the pair table
/// and the per-pair fiber rotation signs of the initial configuration.
class PairSystem {
public:
    explicit PairSystem(BodySet set);

    int body_count() const { return static_cast<int>(masses_.size()); }
    int pair_count() const { return static_cast<int>(pairs_.size()); }
    double mass(int i) const { return masses_[static_cast<std::size_t>(i)]; }
    double total_mass() const { return total_mass_; }
    std::pair<int, int> pair_bodies(int k) const { return pairs_[static_cast<std::size_t>(k)]; }
    int pair_index(int i, int j) const;
    /// Rotation sign of pair k, fixed by the x-branch of its initial
    /// relative coordinate: +1 for x >= 0, -1 for x < 0.
    int pair_rotation_sign(int k) const { return signs_[static_cast<std::size_t>(k)]; }
    /// Largest pairwise separation of the initial configuration.
    double initial_diameter() const { return initial_diameter_; }
    const BodySet& initial_bodies() const { return initial_; }

    /// Initial state on the fiber bundle over the initial configuration:
    /// each pair takes u = R(+-vartheta_k) K^-1(X_k; theta_ref) with the
    /// sign given by the pair's x-branch. Throws CollisionError when two
    /// bodies coincide.
    RegState init_state(std::span<const double> vartheta, double theta_ref) const;
    RegState init_state(double vartheta, double theta_ref) const;

    /// Barycentric positions and velocities from the redundant pairwise
    /// coordinates: q_i = (1/M) sum_j m_j X_ij.
    CartesianState reconstruct(const RegState& state) const;

    /// Lagrangian Lambda = T + U with T from reconstructed velocities and
    /// U from the exact KS radii r_k = ||u_k||^2. Throws CollisionError
    /// on a vanishing pair radius.
    double lagrangian(const RegState& state) const;

    /// Total energy E = T - U.
    double energy(const RegState& state) const;

    /// Max over pairs of || K(u_k) - (q_i - q_j) ||, the drift of the
    /// redundant coordinates against the reconstructed positions.
    double consistency_defect(const RegState& state) const;

    /// Vector field in fictitious time:
    ///   u_k' = w_k / (r_k Lambda)
    ///   w_k' = [ ((|w_k|^2 - M_k/2)/r_k^2) u_k + (1/2) L^T(u_k) P_k ] / Lambda
    ///   t'   = 1 / Lambda
    /// with M_k = m_i + m_j and P_k the third-body perturbation assembled
    /// from pairwise relative coordinates. The grouped two-body term uses
    /// the identity (1/2) L^T(u)(-M X / r^3) = -M u / (2 r^2), so the
    /// field stays finite through binary close approaches.
    void rhs(std::span<const double> y, std::span<double> dydt) const;
    OdeRhs rhs_function() const;

    int dimension() const { return 8 * pair_count() + 1; }
    int time_index() const { return 8 * pair_count(); }
    std::vector<double> pack(const RegState& state) const;
    RegState unpack(std::span<const double> y) const;

private:
    std::vector<double> masses_;
    double total_mass_ = 0.0;
    std::vector<std::pair<int, int>> pairs_;  // (i, j), i < j, lexicographic
    std::vector<int> pair_lookup_;            // N x N -> pair index
    std::vector<int> signs_;
    double initial_diameter_ = 0.0;
    BodySet initial_;  // barycentric
};

}  // namespace ksreg
