#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "kh/measures.hpp"
#include "kh/reports.hpp"

using namespace kh;

namespace {

constexpr double kPi = 3.14159265358979323846;

GridFunction radial_grid(int n, double beta, int npts, double half = 1.0) {
    const double h = 2.0 * half / (npts - 1);
    return sample(RadialPowerSpec{1.0, beta}, std::vector<double>(static_cast<std::size_t>(n), -half),
                  h, std::vector<int>(static_cast<std::size_t>(n), npts));
}

GridFunction quadratic_grid(const SymMatrix& q, int npts, double half = 1.0) {
    const int n = q.dim();
    const double h = 2.0 * half / (npts - 1);
    return sample(QuadraticSpec{q, std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0},
                  std::vector<double>(static_cast<std::size_t>(n), -half), h,
                  std::vector<int>(static_cast<std::size_t>(n), npts));
}

} // namespace

TEST_CASE("unit ball volumes") {
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(unit_ball_volume(2) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-12));
}

TEST_CASE("ball masses of a smooth convex quadratic") {
    // u = |x|^2/2 in the plane: F_2 = det(I) = 1, so the mass of B(0, r)
    // is its area for every mollification level.
    const auto u = quadratic_grid(SymMatrix::identity(2), 257);
    const auto est = hessian_measure_ball(u, 2, {0.0, 0.0}, {0.5, 0.35}, {0.06, 0.04});
    for (const auto& row : est.masses) {
        CHECK(row[0] == doctest::Approx(kPi * 0.25).epsilon(0.01));
        CHECK(row[1] == doctest::Approx(kPi * 0.35 * 0.35).epsilon(0.01));
    }
    // Monotone in r, nonnegative, and Cauchy-stable across levels.
    for (const auto& row : est.masses) CHECK(row[1] < row[0]);
    REQUIRE(est.cauchy_diffs.size() == 1);
    CHECK(est.cauchy_diffs[0][0] <= 1e-3);
}

TEST_CASE("ball mass rejections") {
    const auto u = quadratic_grid(SymMatrix::identity(2), 65);
    CHECK_THROWS_AS(hessian_measure_ball(u, 2, {0.0, 0.0}, {0.9}, {0.2}), BallOutOfDomain);
    // Concave input fails the k-convexity pre-check.
    SymMatrix neg(2);
    neg.at(0, 0) = -2.0;
    neg.at(1, 1) = -2.0;
    const auto w = quadratic_grid(neg, 65);
    CHECK_THROWS_AS(hessian_measure_ball(w, 2, {0.0, 0.0}, {0.3}, {0.15}), NotKConvex);
}

TEST_CASE("Monge-Ampere atom of the cone function") {
    // u = |x| in the plane: all order-2 mass near the origin is the atom,
    // whose weight is the area of the gradient image (the unit disc).
    const auto u = radial_grid(2, 1.0, 513);
    const auto est = hessian_measure_ball(u, 2, {0.0, 0.0}, {0.5}, {0.125, 0.0625, 0.03125});
    const double target = kPi;
    // Approach improves as eps descends.
    const double e0 = std::fabs(est.masses[0][0] - target);
    const double e2 = std::fabs(est.masses[2][0] - target);
    CHECK(e2 < e0);
    CHECK(est.masses[2][0] == doctest::Approx(target).epsilon(0.03));
}

TEST_CASE("masses are nonnegative and additive over disjoint balls") {
    const auto u = radial_grid(2, 1.2, 257);
    const auto left = hessian_measure_ball(u, 2, {-0.4, 0.0}, {0.25}, {0.05});
    const auto right = hessian_measure_ball(u, 2, {0.45, 0.0}, {0.25}, {0.05});
    CHECK(left.masses[0][0] >= -1e-12);
    CHECK(right.masses[0][0] >= -1e-12);

    // Union mass via an indicator sum over both balls at the same level.
    const auto m = mollify(u, 0.05);
    const double h = m.spacing();
    double union_mass = 0.0;
    for (std::int64_t f = 0; f < m.size(); ++f) {
        const auto idx = m.unflatten(f);
        if (!m.is_interior(idx, 1)) continue;
        const auto x = m.point(idx);
        const double dl = std::hypot(x[0] + 0.4, x[1]);
        const double dr = std::hypot(x[0] - 0.45, x[1]);
        if (dl < 0.25 || dr < 0.25) union_mass += f_k_at(m, idx, 2) * h * h;
    }
    CHECK(std::fabs(union_mass - left.masses[0][0] - right.masses[0][0]) <= 1e-10);
}

TEST_CASE("weak-continuity surrogate in the exponent") {
    // beta_m -> beta: the level masses converge too.
    const double r = 0.35, eps = 0.0625;
    const auto base = hessian_measure_ball(radial_grid(2, 1.25, 257), 2, {0.0, 0.0}, {r}, {eps});
    double prev_gap = -1.0;
    for (int m = 2; m <= 4; ++m) {
        const double beta_m = 1.25 + std::pow(2.0, -m);
        const auto est = hessian_measure_ball(radial_grid(2, beta_m, 257), 2, {0.0, 0.0}, {r}, {eps});
        const double gap = std::fabs(est.masses[0][0] - base.masses[0][0]);
        if (prev_gap >= 0.0) CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap <= 0.05 * base.masses[0][0]);
}

TEST_CASE("lower semicontinuity direction on a smooth-region ball") {
    // The finest-level mollified mass of a ball in the smooth region
    // dominates the direct F_k integral up to 5%.
    const auto u = radial_grid(2, 1.5, 257);
    const std::vector<double> center{0.45, 0.2};
    const auto est = hessian_measure_ball(u, 2, center, {0.2}, {0.08, 0.04});
    const double h = u.spacing();
    double direct = 0.0;
    for (std::int64_t f = 0; f < u.size(); ++f) {
        const auto idx = u.unflatten(f);
        if (!u.is_interior(idx, 1)) continue;
        const auto x = u.point(idx);
        if (std::hypot(x[0] - center[0], x[1] - center[1]) < 0.2) direct += f_k_at(u, idx, 2) * h * h;
    }
    CHECK(est.masses[1][0] >= direct - 0.05 * std::fabs(direct));
}

TEST_CASE("density probe on a constant-density quadratic") {
    SymMatrix q(2);
    q.at(0, 0) = 1.0;
    q.at(1, 1) = 2.0;
    const auto u = quadratic_grid(q, 257);
    const auto probe = density_probe(u, 2, {0.1, -0.2}, {0.4, 0.2});
    CHECK(probe.status == DensityProbe::Status::regular);
    CHECK_FALSE(probe.singular_flag);
    CHECK(probe.h_estimate == doctest::Approx(2.0).epsilon(0.02));
    CHECK(probe.f_k_value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(probe.relative_gap <= 0.02);
    CHECK(probe.stable_r == doctest::Approx(0.2));
}

TEST_CASE("density probe flags the atom at the cone tip and not beside it") {
    const auto u = radial_grid(2, 1.0, 513);
    const auto at_tip = density_probe(u, 2, {0.0, 0.0}, {0.4, 0.2, 0.1});
    CHECK(at_tip.status == DensityProbe::Status::singular);
    CHECK(at_tip.singular_flag);

    const auto beside = density_probe(u, 2, {0.5, 0.0}, {0.4, 0.2, 0.1});
    CHECK(beside.status == DensityProbe::Status::regular);
    CHECK_FALSE(beside.singular_flag);
    CHECK(std::fabs(beside.h_estimate) <= 0.05);
    CHECK(std::fabs(beside.f_k_value) <= 0.05);
}

TEST_CASE("density probe validation") {
    const auto u = quadratic_grid(SymMatrix::identity(2), 65);
    CHECK_THROWS_AS(density_probe(u, 2, {0.0, 0.0}, {0.2}), InvalidSpec);            // one radius
    CHECK_THROWS_AS(density_probe(u, 2, {0.0, 0.0}, {0.2, 0.3}), InvalidSpec);       // not decreasing
    CHECK_THROWS_AS(density_probe(u, 2, {0.0, 0.0}, {0.4, 0.05}), EpsilonTooSmall);  // eps under 3h
    const auto fine = quadratic_grid(SymMatrix::identity(2), 257);
    CHECK_THROWS_AS(density_probe(fine, 2, {0.8, 0.0}, {0.4, 0.2}), BallOutOfDomain);
}

TEST_CASE("decomposition report summarizes probe statuses") {
    const auto u = radial_grid(2, 1.0, 513);
    std::vector<std::vector<double>> probes;
    for (double x : {-0.4, 0.0, 0.4})
        for (double y : {-0.4, 0.0, 0.4}) probes.push_back({x, y});
    const auto summary = decomposition_report(u, 2, probes, {0.4, 0.2, 0.1});
    CHECK(summary.singular == 1);
    CHECK(summary.regular == 8);
    CHECK(summary.inconclusive == 0);
    CHECK(summary.max_relative_gap <= 0.05);
    REQUIRE(summary.probes.size() == 9);
    // The singular probe is the one at the origin.
    for (const auto& p : summary.probes) {
        const bool is_origin = p.point[0] == 0.0 && p.point[1] == 0.0;
        CHECK(p.singular_flag == is_origin);
    }
}

TEST_CASE("zero function: every probe regular with zero density") {
    const auto u = quadratic_grid(SymMatrix(2), 129); // identically zero
    const auto summary = decomposition_report(u, 2, {{0.0, 0.0}, {0.2, -0.1}}, {0.5, 0.4});
    CHECK(summary.regular == 2);
    CHECK(summary.max_relative_gap <= 1e-12);
    for (const auto& p : summary.probes) {
        CHECK(p.h_estimate == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(p.f_k_value == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("measure reports serialize to JSON records") {
    const auto u = quadratic_grid(SymMatrix::identity(2), 129);
    const auto est = hessian_measure_ball(u, 2, {0.0, 0.0}, {0.3}, {0.1, 0.05});
    const auto j = to_json(est);
    CHECK(j.contains("masses"));
    CHECK(j["masses"].size() == 2);
    const auto probe = density_probe(u, 2, {0.0, 0.0}, {0.5, 0.4});
    const auto pj = to_json(probe);
    CHECK(pj["status"] == "regular");
    CHECK(pj.contains("ratios"));
}
