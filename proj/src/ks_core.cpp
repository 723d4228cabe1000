#include "ksreg/ks_core.hpp"

#include <cmath>
#include <string>

namespace ksreg {

KSVec apply_ks_matrix(const KSVec& u, const KSVec& v) {
    return {u.u1 * v.u1 - u.u2 * v.u2 - u.u3 * v.u3 + u.u4 * v.u4,
            u.u2 * v.u1 + u.u1 * v.u2 - u.u4 * v.u3 - u.u3 * v.u4,
            u.u3 * v.u1 + u.u4 * v.u2 + u.u1 * v.u3 + u.u2 * v.u4,
            u.u4 * v.u1 - u.u3 * v.u2 + u.u2 * v.u3 - u.u1 * v.u4};
}

KSVec apply_ks_matrix_transpose(const KSVec& u, const KSVec& v) {
    return {u.u1 * v.u1 + u.u2 * v.u2 + u.u3 * v.u3 + u.u4 * v.u4,
            -u.u2 * v.u1 + u.u1 * v.u2 + u.u4 * v.u3 - u.u3 * v.u4,
            -u.u3 * v.u1 - u.u4 * v.u2 + u.u1 * v.u3 + u.u2 * v.u4,
            u.u4 * v.u1 - u.u3 * v.u2 + u.u2 * v.u3 - u.u1 * v.u4};
}

Vec3 ks_map(const KSVec& u) {
    // First three rows of L(u) u; the fourth vanishes identically.
    return {u.u1 * u.u1 - u.u2 * u.u2 - u.u3 * u.u3 + u.u4 * u.u4,
            2.0 * (u.u1 * u.u2 - u.u3 * u.u4),
            2.0 * (u.u1 * u.u3 + u.u2 * u.u4)};
}

KSVec fiber_rotate(const KSVec& u, double vartheta) {
    const double c = std::cos(vartheta);
    const double s = std::sin(vartheta);
    return {c * u.u1 - s * u.u4,
            c * u.u2 + s * u.u3,
            c * u.u3 - s * u.u2,
            c * u.u4 + s * u.u1};
}

KSVec fiber_tangent(const KSVec& u, double vartheta) {
    const double c = std::cos(vartheta);
    const double s = std::sin(vartheta);
    // d/dvartheta of the gauge rotation: -sin(vartheta) u + cos(vartheta) tangent(u)
    return {-s * u.u1 - c * u.u4,
            -s * u.u2 + c * u.u3,
            -s * u.u3 - c * u.u2,
            -s * u.u4 + c * u.u1};
}

KSVec tangent(const KSVec& u) { return {-u.u4, u.u3, -u.u2, u.u1}; }

double bilinear(const KSVec& u, const KSVec& w) {
    // grouped so that l(u, u) cancels exactly in floating point
    return (u.u1 * w.u4 - u.u4 * w.u1) + (u.u3 * w.u2 - u.u2 * w.u3);
}

Vec3 velocity_map(const KSVec& u, const KSVec& uprime) {
    const double r = radius(u);
    if (r <= 0.0) throw CollisionError("velocity_map: zero radius (collision state)");
    const KSVec p = apply_ks_matrix(u, uprime);
    const double f = 2.0 / r;
    return {f * p.u1, f * p.u2, f * p.u3};
}

KSVec velocity_inverse(const KSVec& u, const Vec3& xdot) {
    const KSVec x4{xdot.x, xdot.y, xdot.z, 0.0};
    return 0.5 * apply_ks_matrix_transpose(u, x4);
}

int branch_sign(const Vec3& x) { return x.x >= 0.0 ? 1 : -1; }

KSVec ks_inverse(const Vec3& x, double theta) {
    const double r = norm(x);
    if (r == 0.0) throw CollisionError("ks_inverse: collision point x = 0");
    const double bigR = std::sqrt(0.5 * (r + std::abs(x.x)));
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    const double v1 = bigR * st;
    const double v2 = (x.y * st - x.z * ct) / (2.0 * bigR);
    const double v3 = (x.y * ct + x.z * st) / (2.0 * bigR);
    const double v4 = -bigR * ct;
    if (x.x >= 0.0) return {v1, v2, v3, v4};
    return {v2, v1, v4, v3};  // swapped axes avoid the singular branch
}

std::vector<KSVec> fiber_sample(const Vec3& x, int n, double theta_ref) {
    if (n < 1) throw std::invalid_argument("fiber_sample: n must be >= 1");
    const KSVec u0 = ks_inverse(x, theta_ref);
    const double sign = static_cast<double>(branch_sign(x));
    std::vector<KSVec> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double vartheta = sign * (2.0 * M_PI * k / n);
        out.push_back(fiber_rotate(u0, vartheta));
    }
    return out;
}

std::vector<KSVec> lift_set(const std::vector<Vec3>& points, int n_per_fiber) {
    std::vector<KSVec> out;
    out.reserve(points.size() * static_cast<std::size_t>(n_per_fiber));
    for (std::size_t i = 0; i < points.size(); ++i) {
        try {
            auto fib = fiber_sample(points[i], n_per_fiber, 0.0);
            out.insert(out.end(), fib.begin(), fib.end());
        } catch (const CollisionError&) {
            throw CollisionError("lift_set: zero point at index " + std::to_string(i));
        }
    }
    return out;
}

Fiber make_fiber(const Vec3& x, double theta_ref) {
    return Fiber{x, ks_inverse(x, theta_ref), branch_sign(x)};
}

FiberBasis fiber_basis(const KSVec& u) {
    if (radius(u) == 0.0) throw std::invalid_argument("fiber_basis: degenerate basis at u = 0");
    return FiberBasis{{KSVec{u.u1, u.u2, u.u3, u.u4},
                       KSVec{-u.u2, u.u1, u.u4, -u.u3},
                       KSVec{-u.u3, -u.u4, u.u1, u.u2},
                       KSVec{u.u4, -u.u3, u.u2, -u.u1}}};
}

KSVec stiefel_cross(const KSVec& u, const KSVec& v) {
    const KSVec v4{v.u4, -v.u3, v.u2, -v.u1};  // fourth column of L(v)
    return apply_ks_matrix(u, v4);
}

KSVec triple_cross(const KSVec& a, const KSVec& b, const KSVec& c) {
    // p_l = cofactor of the l-th unit vector in det[[e]; a; b; c].
    auto det3 = [](double m00, double m01, double m02, double m10, double m11, double m12,
                   double m20, double m21, double m22) {
        return m00 * (m11 * m22 - m12 * m21) - m01 * (m10 * m22 - m12 * m20) +
               m02 * (m10 * m21 - m11 * m20);
    };
    const double p1 = det3(a.u2, a.u3, a.u4, b.u2, b.u3, b.u4, c.u2, c.u3, c.u4);
    const double p2 = -det3(a.u1, a.u3, a.u4, b.u1, b.u3, b.u4, c.u1, c.u3, c.u4);
    const double p3 = det3(a.u1, a.u2, a.u4, b.u1, b.u2, b.u4, c.u1, c.u2, c.u4);
    const double p4 = -det3(a.u1, a.u2, a.u3, b.u1, b.u2, b.u3, c.u1, c.u2, c.u3);
    return {p1, p2, p3, p4};
}

Vec3 stereographic_project(const KSVec& u, int pole_axis) {
    if (pole_axis < 1 || pole_axis > 4)
        throw std::invalid_argument("stereographic_project: pole_axis must be in 1..4");
    const double n = norm(u);
    if (n == 0.0) throw ProjectionError("stereographic_project: zero vector");
    const double c[4] = {u.u1 / n, u.u2 / n, u.u3 / n, u.u4 / n};
    const double denom = 1.0 - c[pole_axis - 1];
    if (denom == 0.0) throw ProjectionError("stereographic_project: point at the pole");
    double out[3];
    int j = 0;
    for (int i = 0; i < 4; ++i) {
        if (i == pole_axis - 1) continue;
        out[j++] = c[i] / denom;
    }
    return {out[0], out[1], out[2]};
}

OscillatorState propagate_kepler_ks(const KSVec& u0, const KSVec& u0prime, double h, double s) {
    if (h <= 0.0) throw std::invalid_argument("propagate_kepler_ks: requires h > 0 (elliptic case)");
    const double omega = std::sqrt(0.5 * h);
    const double c = std::cos(omega * s);
    const double sn = std::sin(omega * s);
    const KSVec u = c * u0 + (sn / omega) * u0prime;
    const KSVec up = (-omega * sn) * u0 + c * u0prime;
    // t(s) = integral of r(sigma) = |u0 cos + (u0'/w) sin|^2 from 0 to s.
    const double a = radius(u0);
    const double b = radius(u0prime) / (omega * omega);
    const double cross = dot(u0, u0prime);
    const double t = 0.5 * (a + b) * s + (a - b) * std::sin(2.0 * omega * s) / (4.0 * omega) +
                     cross * sn * sn / (omega * omega);
    return OscillatorState{u, up, t};
}

}  // namespace ksreg
