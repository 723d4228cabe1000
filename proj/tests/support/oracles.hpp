#pragma once

// Test-only reference implementations, kept independent of the library's
// expanded formulas: matrices are built entry by entry from their
// definitions and applied by generic matrix-vector products.

#include <array>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "ksreg/vec.hpp"

namespace oracle {

using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 ks_matrix(const ksreg::KSVec& u) {
    return Mat4{{{u.u1, -u.u2, -u.u3, u.u4},
                 {u.u2, u.u1, -u.u4, -u.u3},
                 {u.u3, u.u4, u.u1, u.u2},
                 {u.u4, -u.u3, u.u2, -u.u1}}};
}

inline Mat4 gauge_matrix(double vartheta) {
    const double c = std::cos(vartheta), s = std::sin(vartheta);
    return Mat4{{{c, 0, 0, -s}, {0, c, s, 0}, {0, -s, c, 0}, {s, 0, 0, c}}};
}

inline Mat4 transpose(const Mat4& m) {
    Mat4 t{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t[i][j] = m[j][i];
    return t;
}

inline Mat4 matmul(const Mat4& a, const Mat4& b) {
    Mat4 c{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double acc = 0;
            for (int k = 0; k < 4; ++k) acc += a[i][k] * b[k][j];
            c[i][j] = acc;
        }
    return c;
}

inline std::array<double, 4> matvec(const Mat4& m, const std::array<double, 4>& v) {
    std::array<double, 4> out{};
    for (int i = 0; i < 4; ++i) {
        double acc = 0;
        for (int k = 0; k < 4; ++k) acc += m[i][k] * v[k];
        out[i] = acc;
    }
    return out;
}

inline std::array<double, 4> to_array(const ksreg::KSVec& u) { return {u.u1, u.u2, u.u3, u.u4}; }
inline ksreg::KSVec to_ksvec(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

inline ksreg::Vec3 cross3(const ksreg::Vec3& a, const ksreg::Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen);
    }
    ksreg::KSVec ksvec(double lo = -2.0, double hi = 2.0) {
        return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
    }
    ksreg::Vec3 vec3(double lo = -2.0, double hi = 2.0) {
        return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
    }
    ksreg::KSVec nonzero_ksvec() {
        for (;;) {
            auto v = ksvec();
            if (ksreg::radius(v) > 1e-2) return v;
        }
    }
    ksreg::Vec3 nonzero_vec3() {
        for (;;) {
            auto v = vec3();
            if (ksreg::norm(v) > 1e-2) return v;
        }
    }
};

// Plain Cartesian N-body right-hand side in physical time:
// y = (q_0..q_{N-1}, v_0..v_{N-1}), G = 1.
inline void cartesian_nbody_rhs(std::span<const double> masses, std::span<const double> y,
                                std::span<double> dydt) {
    const std::size_t n = masses.size();
    for (std::size_t i = 0; i < 3 * n; ++i) dydt[i] = y[3 * n + i];
    for (std::size_t i = 0; i < n; ++i) {
        double ax = 0, ay = 0, az = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = y[3 * j] - y[3 * i];
            const double dy_ = y[3 * j + 1] - y[3 * i + 1];
            const double dz = y[3 * j + 2] - y[3 * i + 2];
            const double r2 = dx * dx + dy_ * dy_ + dz * dz;
            const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
            ax += masses[j] * dx * inv_r3;
            ay += masses[j] * dy_ * inv_r3;
            az += masses[j] * dz * inv_r3;
        }
        dydt[3 * n + 3 * i] = ax;
        dydt[3 * n + 3 * i + 1] = ay;
        dydt[3 * n + 3 * i + 2] = az;
    }
}

}  // namespace oracle
