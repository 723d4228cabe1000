#pragma once

#include <cmath>

namespace ksreg {

/// Vector in Cartesian space E^3. Where a four-component extension is
/// needed the fourth component is identically zero.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double c, const Vec3& a) { return {c * a.x, c * a.y, c * a.z}; }
    friend Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    Vec3& operator+=(const Vec3& b) { x += b.x; y += b.y; z += b.z; return *this; }
    Vec3& operator-=(const Vec3& b) { x -= b.x; y -= b.y; z -= b.z; return *this; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

/// Vector in the parametric space U^4 of the Kustaanheimo-Stiefel
/// transformation. The squared norm equals the Cartesian radius.
struct KSVec {
    double u1 = 0.0;
    double u2 = 0.0;
    double u3 = 0.0;
    double u4 = 0.0;

    friend KSVec operator+(const KSVec& a, const KSVec& b) {
        return {a.u1 + b.u1, a.u2 + b.u2, a.u3 + b.u3, a.u4 + b.u4};
    }
    friend KSVec operator-(const KSVec& a, const KSVec& b) {
        return {a.u1 - b.u1, a.u2 - b.u2, a.u3 - b.u3, a.u4 - b.u4};
    }
    friend KSVec operator*(double c, const KSVec& a) { return {c * a.u1, c * a.u2, c * a.u3, c * a.u4}; }
    friend KSVec operator-(const KSVec& a) { return {-a.u1, -a.u2, -a.u3, -a.u4}; }
};

inline double dot(const KSVec& a, const KSVec& b) {
    return a.u1 * b.u1 + a.u2 * b.u2 + a.u3 * b.u3 + a.u4 * b.u4;
}
/// Squared norm; equals the Cartesian radius r after the KS map.
inline double radius(const KSVec& a) { return dot(a, a); }
inline double norm(const KSVec& a) { return std::sqrt(radius(a)); }

}  // namespace ksreg
