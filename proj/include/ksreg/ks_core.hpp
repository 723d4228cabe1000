#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "ksreg/vec.hpp"

namespace ksreg {

/// Thrown where an operation is singular at the Cartesian origin
/// (collision point / collision state).
class CollisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by the stereographic projection when the input sits at the pole.
class ProjectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A Cartesian point together with the circle of its KS preimages.
/// The circle is generated from `generator` by the gauge rotation; the
/// rotation angle is applied with `branch_sign` (+1 for x >= 0, -1 for
/// x < 0, matching the axis convention of the inverse map).
struct Fiber {
    Vec3 base_point;
    KSVec generator;
    int branch_sign = 1;
};

/// Orthogonal basis attached to a fiber: the four columns of the KS
/// matrix L(u). Satisfies col[i]·col[j] = r δ_ij and col[3] = -tangent(u).
struct FiberBasis {
    std::array<KSVec, 4> col;
};

/// Result of the closed-form KS Kepler oscillator propagation.
struct OscillatorState {
    KSVec u;
    KSVec uprime;
    double t = 0.0;  // physical time elapsed, integral of r(s)
};

/// L(u) v, the KS matrix applied to a four-vector (expanded explicitly).
KSVec apply_ks_matrix(const KSVec& u, const KSVec& v);

/// L^T(u) v.
KSVec apply_ks_matrix_transpose(const KSVec& u, const KSVec& v);

/// The KS (Hopf) map U^4 -> E^3: first three components of L(u) u.
/// Total; the image radius is ||u||^2.
Vec3 ks_map(const KSVec& u);

/// Gauge rotation R(vartheta) u moving a point along its fiber. Preserves
/// the norm; inverted by the opposite angle.
KSVec fiber_rotate(const KSVec& u, double vartheta);

/// Vector tangent to the fiber at gauge angle vartheta, i.e. dR/dvartheta
/// applied to u. Orthogonal to fiber_rotate(u, vartheta) for every angle.
KSVec fiber_tangent(const KSVec& u, double vartheta);

/// Tangent to the fiber at u itself: (-u4, u3, -u2, u1).
KSVec tangent(const KSVec& u);

/// Bilinear form l(u, w) = u1 w4 - u2 w3 + u3 w2 - u4 w1. Vanishes iff
/// L(u) w = L(w) u, iff w is orthogonal to the fiber through u.
double bilinear(const KSVec& u, const KSVec& w);

/// Cartesian velocity (2/r) L(u) u'. Requires r > 0; the dropped fourth
/// component is proportional to the bilinear form and vanishes when the
/// bilinear relation holds.
Vec3 velocity_map(const KSVec& u, const KSVec& uprime);

/// KS velocity u' = (1/2) L^T(u) xdot. The result always satisfies
/// bilinear(u, result) = 0 in exact arithmetic.
KSVec velocity_inverse(const KSVec& u, const Vec3& xdot);

/// Sign convention for the fiber parameterization of a Cartesian point:
/// +1 when x >= 0, -1 otherwise.
int branch_sign(const Vec3& x);

/// Inverse KS map: one preimage of x, selected by the fiber angle theta.
/// Uses the component-swapped branch for x < 0 to avoid the singular
/// axis. Throws CollisionError for x = 0.
KSVec ks_inverse(const Vec3& x, double theta);

/// n preimages of x at uniform gauge spacing 2*pi/n starting from
/// ks_inverse(x, theta_ref); rotation sign follows branch_sign(x).
std::vector<KSVec> fiber_sample(const Vec3& x, int n, double theta_ref);

/// Concatenated fiber samples over a point set (a dimension-raising lift;
/// output size is n_per_fiber * points.size()). On a zero point, throws
/// CollisionError naming the offending index.
std::vector<KSVec> lift_set(const std::vector<Vec3>& points, int n_per_fiber);

/// Full fiber of x, carrying the generator and rotation convention.
Fiber make_fiber(const Vec3& x, double theta_ref);

/// Columns of L(u) as an orthogonal basis attached to the fiber at u.
/// Throws on the zero vector (degenerate basis).
FiberBasis fiber_basis(const KSVec& u);

/// Stiefel's cross product p = L(u) v^4 with v^4 the fourth column of
/// L(v). The first three components reduce to the 3D cross product for
/// embedded vectors; p4 = u·v.
KSVec stiefel_cross(const KSVec& u, const KSVec& v);

/// Four-dimensional cross product of three vectors (cofactor expansion).
/// For a fiber basis, triple_cross(col0, col1, col2) = r * col3.
KSVec triple_cross(const KSVec& a, const KSVec& b, const KSVec& c);

/// Stereographic projection of u (normalized internally to the unit
/// 3-sphere) from the pole at +1 along `pole_axis` (1..4). The image is
/// the remaining three coordinates divided by (1 - u_k/||u||).
Vec3 stereographic_project(const KSVec& u, int pole_axis = 4);

/// Closed-form propagation of the KS Kepler oscillator u'' = -(h/2) u
/// for h > 0, with the physical time recovered as the exact integral of
/// r(s). The oscillator invariant h(u·u)/4 + (u'·u')/2 is conserved.
OscillatorState propagate_kepler_ks(const KSVec& u0, const KSVec& u0prime, double h, double s);

}  // namespace ksreg
