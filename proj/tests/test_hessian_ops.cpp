#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "kh/hessian_ops.hpp"
#include "kh/rng.hpp"

using namespace kh;

namespace {

// Oracle: Hessian of sigma |x|^beta entry by entry from the explicit
// partial derivatives d_ij = sigma beta r^(beta-2) (delta_ij +
// (beta-2) x_i x_j / r^2), then eigenvalues via the library Jacobi.
Spectrum radial_spectrum_oracle(int n, double sigma, double beta, std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    const double r = std::sqrt(r2);
    SymMatrix h(n);
    const double factor = sigma * beta * std::pow(r, beta - 2.0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = factor * (beta - 2.0) * x[static_cast<std::size_t>(i)] *
                       x[static_cast<std::size_t>(j)] / r2;
            if (i == j) v += factor;
            h.at(i, j) = v;
        }
    return eigenvalues(h);
}

} // namespace

TEST_CASE("k-Hessian values on closed forms") {
    // |x|^2/2: F_n = det(I) = 1 everywhere.
    {
        SymMatrix q = SymMatrix::identity(2);
        const auto u = sample(QuadraticSpec{q, {0.0, 0.0}, 0.0}, {-1.0, -1.0}, 0.125, {17, 17});
        for (int i = 1; i < 16; ++i)
            for (int j = 1; j < 16; ++j)
                CHECK(f_k_at(u, std::vector<int>{i, j}, 2) == doctest::Approx(1.0).epsilon(1e-10));
    }
    // Q = diag(2,3): F_1 = trace = 5.
    {
        SymMatrix q(2);
        q.at(0, 0) = 2.0;
        q.at(1, 1) = 3.0;
        const auto u = sample(QuadraticSpec{q, {0.0, 0.0}, 0.0}, {-1.0, -1.0}, 0.125, {17, 17});
        CHECK(f_k_at(u, std::vector<int>{8, 8}, 1) == doctest::Approx(5.0).epsilon(1e-10));
    }
    // |x| in R^3 at r = 1: F_2 = S_2(0, 1, 1) = 1.
    {
        const double h = 1.0 / 64;
        const auto u = sample(RadialPowerSpec{1.0, 1.0}, {-1.5, -1.5, -1.5}, h, {193, 193, 193});
        const auto idx = u.nearest_index(std::vector<double>{1.0, 0.0, 0.0});
        CHECK(f_k_at(u, idx, 2) == doctest::Approx(1.0).epsilon(50.0 * h * h));
    }
}

TEST_CASE("radial spectrum closed form") {
    // beta = 2 is the quadratic case: all eigenvalues 2 sigma.
    {
        const Spectrum s = radial_spectrum({3, 1.0, 2.0}, 0.7);
        for (int i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(2.0).epsilon(1e-14));
    }
    // beta = 1: (1/r, ..., 1/r, 0).
    {
        const Spectrum s = radial_spectrum({3, 1.0, 1.0}, 2.0);
        CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(s[1] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(s[2] == doctest::Approx(0.0).epsilon(1e-14));
    }
    // beta = 1/2, n = 3, r = 1: tangential pair 0.5, radial
    // beta(beta-1) = -0.25 (verified against the symbolic oracle).
    {
        const Spectrum s = radial_spectrum({3, 1.0, 0.5}, 1.0);
        CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(s[1] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(s[2] == doctest::Approx(-0.25).epsilon(1e-14));
        const Spectrum oracle =
            radial_spectrum_oracle(3, 1.0, 0.5, std::vector<double>{0.6, 0.0, 0.8});
        for (int i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(radial_spectrum({3, 1.0, 1.0}, 0.0), NonpositiveRadius);
    CHECK_THROWS_AS(radial_spectrum({3, 1.0, -1.0}, 1.0), InvalidSpec);
}

TEST_CASE("radial spectrum agrees with symbolic and finite-difference routes") {
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(0, 1));
        const double sigma = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.3 ? -1.0 : 1.0);
        const double beta = rng.uniform(0.4, 2.5);
        std::vector<double> x(static_cast<std::size_t>(n));
        double r2 = 0.0;
        for (auto& c : x) {
            c = rng.uniform(0.3, 0.9);
            r2 += c * c;
        }
        const double r = std::sqrt(r2);
        const Spectrum closed = radial_spectrum({n, sigma, beta}, r);
        const Spectrum oracle = radial_spectrum_oracle(n, sigma, beta, x);
        for (int i = 0; i < n; ++i)
            CHECK(closed[i] == doctest::Approx(oracle[i]).epsilon(1e-11));
    }
    // Finite-difference cross-check at an off-axis point.
    const double h = 1.0 / 96;
    const auto u = sample(RadialPowerSpec{1.0, 1.5}, {-1.2, -1.2}, h, {231, 231});
    const auto idx = u.nearest_index(std::vector<double>{0.5, 0.25});
    const auto x = u.point(idx);
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    const Spectrum fd = eigenvalues(hessian_fd(u, idx));
    const Spectrum closed = radial_spectrum({2, 1.0, 1.5}, r);
    for (int i = 0; i < 2; ++i) CHECK(std::fabs(fd[i] - closed[i]) <= 100.0 * h * h);
}

TEST_CASE("radial k-convexity threshold") {
    CHECK(radial_kconvexity_threshold(3, 2).beta_star == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(radial_kconvexity_threshold(2, 2).beta_star == doctest::Approx(1.0).epsilon(1e-15));
    for (int n = 2; n <= 6; ++n)
        CHECK(radial_kconvexity_threshold(n, n).beta_star == doctest::Approx(1.0).epsilon(1e-15));

    for (auto [n, k] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {3, 3}, {4, 3}, {5, 4}}) {
        const auto report = radial_kconvexity_threshold(n, k);
        CHECK(std::fabs(report.swept_threshold - report.beta_star) <= 1e-3 + 1e-12);
        // At beta*, the order-k bracket vanishes and the lower ones stay
        // strictly positive.
        CHECK(std::fabs(radial_s_j_bracket(n, k, report.beta_star)) <= 1e-12);
        for (int j = 1; j < k; ++j) CHECK(radial_s_j_bracket(n, j, report.beta_star) > 0.0);
        // Sweep rows flip admissibility exactly around the threshold.
        for (const auto& row : report.table) {
            if (row.beta < report.beta_star - 1e-3) CHECK_FALSE(row.admissible);
            if (row.beta > report.beta_star + 1e-3 && row.beta > 0.0) CHECK(row.admissible);
        }
    }
    CHECK_THROWS_AS(radial_kconvexity_threshold(3, 4), KOutOfRange);
}

TEST_CASE("k-Hessian is invariant under affine additions") {
    SymMatrix q(2);
    q.at(0, 0) = 1.2;
    q.at(0, 1) = 0.3;
    q.at(1, 1) = 0.9;
    SumSpec with_affine;
    with_affine.terms.push_back(QuadraticSpec{q, {0.0, 0.0}, 0.0});
    with_affine.terms.push_back(QuadraticSpec{SymMatrix(2), {3.7, -1.9}, 11.0});
    const auto u = sample(QuadraticSpec{q, {0.0, 0.0}, 0.0}, {-1.0, -1.0}, 0.0625, {33, 33});
    const auto v = sample(with_affine, {-1.0, -1.0}, 0.0625, {33, 33});
    for (int k = 1; k <= 2; ++k)
        CHECK(f_k_at(u, std::vector<int>{16, 16}, k) ==
              doctest::Approx(f_k_at(v, std::vector<int>{16, 16}, k)).epsilon(1e-9));
}

TEST_CASE("adding a multiple of |x|^2/2 shifts the Hessian spectrum") {
    const double lambda_shift = 0.8;
    SymMatrix q(2);
    q.at(0, 0) = 1.1;
    q.at(0, 1) = -0.2;
    q.at(1, 1) = 0.7;
    SymMatrix shifted_q = q;
    shifted_q.at(0, 0) += lambda_shift;
    shifted_q.at(1, 1) += lambda_shift;

    const auto u = sample(QuadraticSpec{q, {0.1, 0.2}, 0.0}, {-1.0, -1.0}, 0.0625, {33, 33});
    const auto v = sample(QuadraticSpec{shifted_q, {0.1, 0.2}, 0.0}, {-1.0, -1.0}, 0.0625, {33, 33});
    const std::vector<int> idx{16, 16};
    const Spectrum su = eigenvalues(hessian_fd(u, idx));
    const Spectrum sv = eigenvalues(hessian_fd(v, idx));
    for (int i = 0; i < 2; ++i)
        CHECK(sv[i] == doctest::Approx(su[i] + lambda_shift).epsilon(1e-9));

    // O(h^2) version on a non-quadratic sample.
    const double h = 1.0 / 96;
    const auto w = sample(RadialPowerSpec{1.0, 1.5}, {-1.2, -1.2}, h, {231, 231});
    SumSpec lifted;
    lifted.terms.push_back(RadialPowerSpec{1.0, 1.5});
    lifted.terms.push_back(QuadraticSpec{SymMatrix::diagonal(std::vector<double>{lambda_shift,
                                                                                 lambda_shift}),
                                         {0.0, 0.0}, 0.0});
    const auto wl = sample(lifted, {-1.2, -1.2}, h, {231, 231});
    const auto idx2 = w.nearest_index(std::vector<double>{0.5, 0.25});
    const Spectrum sw = eigenvalues(hessian_fd(w, idx2));
    const Spectrum swl = eigenvalues(hessian_fd(wl, idx2));
    for (int i = 0; i < 2; ++i) CHECK(std::fabs(swl[i] - sw[i] - lambda_shift) <= 100.0 * h * h);
}

TEST_CASE("mollified radial family matches the closed form away from the origin") {
    // Within 5% at radii >= 10 eps.
    const double h = 1.0 / 128;
    const double eps = 4.0 * h;
    for (double beta : {0.75, 1.0, 1.5}) {
        const auto u = sample(RadialPowerSpec{1.0, beta}, {-1.2, -1.2}, h, {309, 309});
        const auto m = mollify(u, eps);
        for (double px : {0.5, 0.8}) {
            const auto idx = m.nearest_index(std::vector<double>{px, 0.31});
            const auto x = m.point(idx);
            const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
            REQUIRE(r >= 10.0 * eps);
            const double got = f_k_at(m, idx, 2);
            const double want = elementary_symmetric(radial_spectrum({2, 1.0, beta}, r), 2);
            CHECK(std::fabs(got - want) <= 0.05 * std::max(std::fabs(want), 0.05));
        }
    }
}
