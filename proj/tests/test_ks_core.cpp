#include <doctest.h>

#include <cmath>

#include "ksreg/ks_core.hpp"
#include "support/oracles.hpp"

using namespace ksreg;

namespace {
double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}
}  // namespace

TEST_CASE("ks_map basics") {
    CHECK(ks_map({1, 0, 0, 0}).x == doctest::Approx(1.0));
    CHECK(ks_map({1, 0, 0, 0}).y == doctest::Approx(0.0));
    CHECK(ks_map({1, 0, 0, 0}).z == doctest::Approx(0.0));

    const Vec3 img = ks_map({1, 1, 0, 0});
    CHECK(img.x == doctest::Approx(0.0));
    CHECK(img.y == doctest::Approx(2.0));
    CHECK(img.z == doctest::Approx(0.0));

    // gauge invariance
    const Vec3 rot = ks_map(fiber_rotate({1, 1, 0, 0}, 0.7));
    CHECK(rot.x == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rot.y == doctest::Approx(2.0));
    CHECK(rot.z == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("ks_map image radius equals squared norm") {
    oracle::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const KSVec u = rng.ksvec();
        CHECK(norm(ks_map(u)) == doctest::Approx(radius(u)).epsilon(1e-13));
    }
}

TEST_CASE("fiber_rotate") {
    const KSVec u{1, 2, 3, 4};
    const KSVec same = fiber_rotate(u, 0.0);
    CHECK(same.u1 == 1.0);
    CHECK(same.u4 == 4.0);

    const KSVec anti = fiber_rotate({1, 0, 0, 0}, M_PI);
    CHECK(anti.u1 == doctest::Approx(-1.0));
    CHECK(std::abs(anti.u2) < 1e-15);
    CHECK(std::abs(anti.u3) < 1e-15);
    CHECK(std::abs(anti.u4) < 1e-15);

    CHECK(radius(fiber_rotate(u, 1.1)) == doctest::Approx(30.0));

    // inverse rotation
    const KSVec back = fiber_rotate(fiber_rotate(u, 0.83), -0.83);
    CHECK(back.u1 == doctest::Approx(1.0));
    CHECK(back.u2 == doctest::Approx(2.0));
    CHECK(back.u3 == doctest::Approx(3.0));
    CHECK(back.u4 == doctest::Approx(4.0));
}

TEST_CASE("fiber_rotate matches the gauge matrix") {
    oracle::Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const KSVec u = rng.ksvec();
        const double th = rng.uniform(-6.4, 6.4);
        const auto want = oracle::matvec(oracle::gauge_matrix(th), oracle::to_array(u));
        const KSVec got = fiber_rotate(u, th);
        CHECK(got.u1 == doctest::Approx(want[0]).epsilon(1e-14));
        CHECK(got.u2 == doctest::Approx(want[1]).epsilon(1e-14));
        CHECK(got.u3 == doctest::Approx(want[2]).epsilon(1e-14));
        CHECK(got.u4 == doctest::Approx(want[3]).epsilon(1e-14));
    }
}

TEST_CASE("r-orthogonality and the gauge identity of the KS matrix") {
    oracle::Rng rng(13);
    for (int i = 0; i < 300; ++i) {
        const KSVec u = rng.ksvec();
        const double r = radius(u);
        const auto L = oracle::ks_matrix(u);
        const auto prod = oracle::matmul(oracle::transpose(L), L);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(std::abs(prod[a][b] - (a == b ? r : 0.0)) <= 1e-13 * std::max(1.0, r));

        // L^T(w) L(u) = r R(vartheta) for w on the fiber of u
        const double th = rng.uniform(-6.0, 6.0);
        const KSVec w = fiber_rotate(u, th);
        const auto lhs = oracle::matmul(oracle::transpose(oracle::ks_matrix(w)), L);
        const auto R = oracle::gauge_matrix(th);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(std::abs(lhs[a][b] - r * R[a][b]) <= 1e-13 * std::max(1.0, r));
    }
}

TEST_CASE("the maps L(u)w and L(w)u agree exactly when the bilinear form vanishes") {
    oracle::Rng rng(23);
    for (int i = 0; i < 500; ++i) {
        const KSVec u = rng.nonzero_ksvec();
        // span orthogonal to the fiber tangent: u and two basis columns
        const FiberBasis b = fiber_basis(u);
        const KSVec w = rng.uniform(-2, 2) * u + rng.uniform(-2, 2) * b.col[1] +
                        rng.uniform(-2, 2) * b.col[2];
        CHECK(std::abs(bilinear(u, w)) < 1e-12 * std::max(1.0, radius(u) * norm(w)));
        const KSVec lhs = apply_ks_matrix(u, w);
        const KSVec rhs = apply_ks_matrix(w, u);
        CHECK(norm(lhs - rhs) < 1e-12 * std::max(1.0, norm(lhs)));

        // and for a generic w the two maps differ only in the fourth slot,
        // by twice the bilinear form
        const KSVec g = rng.ksvec();
        const KSVec d = apply_ks_matrix(u, g) - apply_ks_matrix(g, u);
        CHECK(std::abs(d.u1) < 1e-13);
        CHECK(std::abs(d.u2) < 1e-13);
        CHECK(std::abs(d.u3) < 1e-13);
        CHECK(d.u4 == doctest::Approx(-2.0 * bilinear(u, g)).epsilon(1e-13));
    }
}

TEST_CASE("bilinear values") {
    const KSVec u{1, 2, 3, 4};
    CHECK(bilinear(u, u) == 0.0);
    CHECK(bilinear(u, tangent(u)) == doctest::Approx(30.0));
    CHECK(bilinear({1, 0, 0, 0}, {0, 1, 0, 0}) == 0.0);

    oracle::Rng rng(14);
    for (int i = 0; i < 200; ++i) {
        const KSVec a = rng.ksvec();
        CHECK(bilinear(a, a) == 0.0);
        // the bilinear form is the dot product against the fiber tangent
        const KSVec b = rng.ksvec();
        CHECK(bilinear(a, b) == doctest::Approx(dot(tangent(a), b)).epsilon(1e-14));
    }
}

TEST_CASE("velocity_map and velocity_inverse") {
    const Vec3 v = velocity_map({1, 0, 0, 0}, {0, 1, 0, 0});
    CHECK(v.x == doctest::Approx(0.0));
    CHECK(v.y == doctest::Approx(2.0));
    CHECK(v.z == doctest::Approx(0.0));

    const Vec3 zero = velocity_map({1, 1, 0, 0}, {0, 0, 0, 0});
    CHECK(norm(zero) == 0.0);

    CHECK_THROWS_AS(velocity_map({0, 0, 0, 0}, {1, 0, 0, 0}), CollisionError);

    const KSVec ui = velocity_inverse({1, 0, 0, 0}, {0, 2, 0});
    CHECK(ui.u1 == doctest::Approx(0.0));
    CHECK(ui.u2 == doctest::Approx(1.0));
    CHECK(ui.u3 == doctest::Approx(0.0));
    CHECK(ui.u4 == doctest::Approx(0.0));

    const KSVec z = velocity_inverse({1, 2, 3, 4}, {0, 0, 0});
    CHECK(radius(z) == 0.0);

    // round trip through the r-orthogonality of the KS matrix
    const KSVec u{1, 1, 0, 0};
    const Vec3 xdot{0.3, -0.2, 0.1};
    const Vec3 rt = velocity_map(u, velocity_inverse(u, xdot));
    CHECK(rt.x == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(rt.y == doctest::Approx(-0.2).epsilon(1e-14));
    CHECK(rt.z == doctest::Approx(0.1).epsilon(1e-14));

    CHECK(std::abs(bilinear({1, 2, 3, 4}, velocity_inverse({1, 2, 3, 4}, {1, 1, 1}))) < 1e-14);
}

TEST_CASE("velocity_inverse satisfies the bilinear relation for random inputs") {
    oracle::Rng rng(15);
    for (int i = 0; i < 1000; ++i) {
        const KSVec u = rng.nonzero_ksvec();
        const Vec3 xd = rng.vec3();
        const double l = bilinear(u, velocity_inverse(u, xd));
        CHECK(std::abs(l) < 1e-13 * std::max(1.0, radius(u) * norm(xd)));
    }
}

TEST_CASE("ks_inverse branches") {
    const KSVec a = ks_inverse({4, 0, 0}, M_PI / 2);
    CHECK(a.u1 == doctest::Approx(2.0));
    CHECK(std::abs(a.u2) < 1e-15);
    CHECK(std::abs(a.u3) < 1e-15);
    CHECK(std::abs(a.u4) < 1e-12);

    const KSVec b = ks_inverse({-1, 0, 0}, 0.0);
    CHECK(b.u1 == doctest::Approx(0.0));
    CHECK(b.u2 == doctest::Approx(0.0));
    CHECK(b.u3 == doctest::Approx(-1.0));
    CHECK(b.u4 == doctest::Approx(0.0));
    const Vec3 back = ks_map(b);
    CHECK(back.x == doctest::Approx(-1.0));

    const Vec3 x{1, 2, 2};
    const Vec3 rt = ks_map(ks_inverse(x, 0.3));
    CHECK(std::abs(rt.x - x.x) < 1e-14 * 3);
    CHECK(std::abs(rt.y - x.y) < 1e-14 * 3);
    CHECK(std::abs(rt.z - x.z) < 1e-14 * 3);

    CHECK_THROWS_AS(ks_inverse({0, 0, 0}, 0.0), CollisionError);
}

TEST_CASE("ks_inverse round trip for random points and angles") {
    oracle::Rng rng(16);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 x = rng.nonzero_vec3();
        const double th = rng.uniform(-7.0, 7.0);
        const Vec3 rt = ks_map(ks_inverse(x, th));
        CHECK(norm(rt - x) < 1e-13 * std::max(1.0, norm(x)));
    }
}

TEST_CASE("consecutive inverse angles differ by a gauge rotation") {
    oracle::Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const Vec3 x = rng.nonzero_vec3();
        const double th = rng.uniform(-3.0, 3.0);
        const double dth = rng.uniform(-3.0, 3.0);
        const double sign = branch_sign(x);
        const KSVec expect = fiber_rotate(ks_inverse(x, th), sign * dth);
        const KSVec got = ks_inverse(x, th + dth);
        CHECK(norm(got - expect) < 1e-13 * std::max(1.0, norm(got)));
    }
}

TEST_CASE("fiber_sample") {
    const Vec3 x{4, 0, 0};
    const auto one = fiber_sample(x, 1, 0.4);
    REQUIRE(one.size() == 1);
    CHECK(norm(one[0] - ks_inverse(x, 0.4)) == 0.0);

    const auto eight = fiber_sample(x, 8, 0.0);
    REQUIRE(eight.size() == 8);
    for (const auto& w : eight) CHECK(norm(ks_map(w) - x) < 1e-14 * 4);

    // consecutive samples related by one gauge step
    const double step = branch_sign(x) * 2.0 * M_PI / 8;
    for (int k = 0; k + 1 < 8; ++k) {
        const KSVec nxt = fiber_rotate(eight[static_cast<std::size_t>(k)], step);
        CHECK(norm(nxt - eight[static_cast<std::size_t>(k + 1)]) < 1e-13);
    }
}

TEST_CASE("lift_set") {
    const auto single = lift_set({Vec3{1, 2, 2}}, 1);
    CHECK(single.size() == 1);

    const auto all = lift_set({Vec3{1, 0, 0}, Vec3{0, 2, 0}, Vec3{0, 0, 3}}, 16);
    CHECK(all.size() == 48);

    // fibers over distinct points cannot share an element
    const auto fa = fiber_sample({1, 0, 0}, 32, 0.0);
    const auto fb = fiber_sample({0, 2, 0}, 32, 0.0);
    double dmin = 1e300;
    for (const auto& a : fa)
        for (const auto& b : fb) dmin = std::min(dmin, norm(a - b));
    CHECK(dmin > 1e-6);

    CHECK_THROWS_WITH_AS(lift_set({Vec3{1, 0, 0}, Vec3{0, 0, 0}}, 4),
                         "lift_set: zero point at index 1", CollisionError);
}

TEST_CASE("tangent") {
    const KSVec t0 = tangent({1, 0, 0, 0});
    CHECK(t0.u1 == 0.0);
    CHECK(t0.u4 == 1.0);

    const KSVec t = tangent({1, 2, 3, 4});
    CHECK(t.u1 == -4.0);
    CHECK(t.u2 == 3.0);
    CHECK(t.u3 == -2.0);
    CHECK(t.u4 == 1.0);

    CHECK(dot(tangent({0.3, -1, 2, 5}), KSVec{0.3, -1, 2, 5}) == 0.0);
}

TEST_CASE("fiber tangent is orthogonal to the fiber point at every angle") {
    oracle::Rng rng(18);
    for (int i = 0; i < 500; ++i) {
        const KSVec u = rng.ksvec();
        const double th = rng.uniform(-7.0, 7.0);
        const double d = dot(fiber_rotate(u, th), fiber_tangent(u, th));
        CHECK(std::abs(d) < 1e-13 * std::max(1.0, radius(u)));
    }
}

TEST_CASE("fiber_basis") {
    const FiberBasis e = fiber_basis({1, 0, 0, 0});
    CHECK(e.col[0].u1 == 1.0);
    CHECK(e.col[1].u2 == 1.0);
    CHECK(e.col[2].u3 == 1.0);
    CHECK(e.col[3].u4 == -1.0);

    const FiberBasis b = fiber_basis({1, 2, 3, 4});
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double want = i == j ? 30.0 : 0.0;
            CHECK(dot(b.col[static_cast<std::size_t>(i)], b.col[static_cast<std::size_t>(j)]) ==
                  doctest::Approx(want).epsilon(1e-13));
        }

    // the fourth column is the negated tangent
    const KSVec t = tangent({1, 2, 3, 4});
    CHECK(norm(b.col[3] + t) == 0.0);

    // the fiber stays in the plane of the first and fourth columns
    const KSVec u{2, 0.5, -0.3, 0.0};  // x >= 0 representative
    CHECK(ks_map(u).x >= 0.0);
    const FiberBasis bu = fiber_basis(u);
    const KSVec w = fiber_rotate(u, 0.9);
    CHECK(std::abs(dot(w, bu.col[1])) < 1e-13 * radius(u));
    CHECK(std::abs(dot(w, bu.col[2])) < 1e-13 * radius(u));

    CHECK_THROWS_AS(fiber_basis({0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("stiefel_cross") {
    const KSVec p = stiefel_cross({1, 0, 0, 0}, {0, 1, 0, 0});
    CHECK(p.u1 == 0.0);
    CHECK(p.u2 == 0.0);
    CHECK(p.u3 == 1.0);
    CHECK(p.u4 == 0.0);

    const KSVec q = stiefel_cross({1, 2, 3, 4}, {1, 2, 3, 4});
    CHECK(q.u1 == 0.0);
    CHECK(q.u2 == 0.0);
    CHECK(q.u3 == 0.0);
    CHECK(q.u4 == 30.0);

    oracle::Rng rng(19);
    for (int i = 0; i < 1000; ++i) {
        const KSVec a = rng.ksvec();
        const KSVec b = rng.ksvec();
        const KSVec c = stiefel_cross(a, b);
        CHECK(c.u4 == doctest::Approx(dot(a, b)).epsilon(1e-13));
    }
    // reduction to the 3D cross product on embedded vectors
    for (int i = 0; i < 1000; ++i) {
        const Vec3 a3 = rng.vec3();
        const Vec3 b3 = rng.vec3();
        const KSVec c = stiefel_cross({a3.x, a3.y, a3.z, 0}, {b3.x, b3.y, b3.z, 0});
        const Vec3 want = oracle::cross3(a3, b3);
        CHECK(rel_err(c.u1, want.x) < 1e-13);
        CHECK(rel_err(c.u2, want.y) < 1e-13);
        CHECK(rel_err(c.u3, want.z) < 1e-13);
    }
}

TEST_CASE("triple cross of the leading basis columns recovers the fourth") {
    const FiberBasis b = fiber_basis({1, 2, 3, 4});
    const KSVec p = triple_cross(b.col[0], b.col[1], b.col[2]);
    const KSVec want = 30.0 * b.col[3];
    CHECK(p.u1 == doctest::Approx(want.u1));
    CHECK(p.u2 == doctest::Approx(want.u2));
    CHECK(p.u3 == doctest::Approx(want.u3));
    CHECK(p.u4 == doctest::Approx(want.u4));

    oracle::Rng rng(20);
    for (int i = 0; i < 200; ++i) {
        const FiberBasis fb = fiber_basis(rng.nonzero_ksvec());
        const double r = radius(fb.col[0]);
        const KSVec t = triple_cross(fb.col[0], fb.col[1], fb.col[2]);
        CHECK(norm(t - r * fb.col[3]) < 1e-12 * std::max(1.0, r * r));
    }
}

TEST_CASE("stereographic projection") {
    const Vec3 a = stereographic_project({1, 0, 0, 0}, 4);
    CHECK(a.x == doctest::Approx(1.0));
    CHECK(a.y == 0.0);
    CHECK(a.z == 0.0);

    const Vec3 b = stereographic_project({0, 0, 0, -1}, 4);
    CHECK(norm(b) == 0.0);

    CHECK_THROWS_AS(stereographic_project({0, 0, 0, 1}, 4), ProjectionError);
    CHECK_THROWS_AS(stereographic_project({0, 0, 0, 2}, 4), ProjectionError);
    CHECK_THROWS_AS(stereographic_project({1, 0, 0, 0}, 5), std::invalid_argument);
}

TEST_CASE("projected fibers of distinct points never touch") {
    const auto fa = fiber_sample({1.0, 0.2, 0.1}, 256, 0.0);
    const auto fb = fiber_sample({0.1, 0.9, -0.4}, 256, 0.0);
    std::vector<Vec3> pa, pb;
    for (const auto& w : fa) pa.push_back(stereographic_project(w, 4));
    for (const auto& w : fb) pb.push_back(stereographic_project(w, 4));
    double dmin = 1e300;
    for (const auto& p : pa)
        for (const auto& q : pb) dmin = std::min(dmin, norm(p - q));
    CHECK(dmin > 0.0);
}

TEST_CASE("kepler oscillator closed form") {
    const OscillatorState id = propagate_kepler_ks({1, 2, 3, 4}, {0.1, 0, 0, 0}, 2.0, 0.0);
    CHECK(id.u.u1 == 1.0);
    CHECK(id.uprime.u1 == 0.1);
    CHECK(id.t == 0.0);

    // h = 2 gives omega = 1; a quarter oscillation swaps position and velocity
    const OscillatorState q = propagate_kepler_ks({1, 0, 0, 0}, {0, 1, 0, 0}, 2.0, M_PI / 2);
    CHECK(q.u.u1 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(q.u.u2 == doctest::Approx(1.0));
    CHECK(q.uprime.u1 == doctest::Approx(-1.0));
    CHECK(q.uprime.u2 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(q.t == doctest::Approx(M_PI / 2));  // r(s) = 1 throughout

    CHECK_THROWS_AS(propagate_kepler_ks({1, 0, 0, 0}, {0, 1, 0, 0}, 0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(propagate_kepler_ks({1, 0, 0, 0}, {0, 1, 0, 0}, -1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("oscillator invariant is conserved") {
    oracle::Rng rng(21);
    for (int i = 0; i < 400; ++i) {
        const KSVec u0 = rng.nonzero_ksvec();
        const KSVec v0 = rng.ksvec();
        const double h = rng.uniform(0.1, 4.0);
        const double s = rng.uniform(0.0, 20.0);
        const double v_initial = h * radius(u0) / 4.0 + radius(v0) / 2.0;
        const OscillatorState out = propagate_kepler_ks(u0, v0, h, s);
        const double v_final = h * radius(out.u) / 4.0 + radius(out.uprime) / 2.0;
        CHECK(std::abs(v_final - v_initial) < 1e-13 * std::max(1.0, v_initial));
    }
}

TEST_CASE("oscillator time integral matches numeric quadrature") {
    // composite Simpson on r(s) as an independent route to t(s)
    oracle::Rng rng(22);
    for (int i = 0; i < 50; ++i) {
        const KSVec u0 = rng.nonzero_ksvec();
        const KSVec v0 = rng.ksvec();
        const double h = rng.uniform(0.2, 3.0);
        const double s_end = rng.uniform(0.1, 6.0);
        const int n = 2000;
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double s = s_end * k / n;
            const double r = radius(propagate_kepler_ks(u0, v0, h, s).u);
            const double wgt = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            acc += wgt * r;
        }
        acc *= s_end / (3.0 * n);
        const double t = propagate_kepler_ks(u0, v0, h, s_end).t;
        CHECK(std::abs(t - acc) < 1e-8 * std::max(1.0, std::abs(acc)));
    }
}

TEST_CASE("circular orbits accumulate a linear time delay") {
    // r(s) constant requires |u'| = omega |u| and u.u' = 0
    const double h = 2.0;  // omega = 1
    auto circular = [&](double r) {
        const KSVec u0{std::sqrt(r), 0, 0, 0};
        const KSVec v0{0, std::sqrt(r), 0, 0};
        return std::pair<KSVec, KSVec>{u0, v0};
    };
    const auto [u1, v1] = circular(1.3);
    const auto [u2, v2] = circular(2.9);
    for (double s : {0.5, 1.0, 5.0, 20.0}) {
        const double t1 = propagate_kepler_ks(u1, v1, h, s).t;
        const double t2 = propagate_kepler_ks(u2, v2, h, s).t;
        CHECK(std::abs((t2 - t1) - (2.9 - 1.3) * s) < 1e-12 * std::max(1.0, s * 2.9));
    }
}
