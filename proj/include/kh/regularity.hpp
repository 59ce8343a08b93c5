#pragma once

#include <cstdint>
#include <vector>

#include "kh/grid.hpp"

namespace kh {

/// One measured instance of an interior estimate lhs <= C * rhs. The
/// checks evaluate the affine-reduced representative of u (first-order
/// jet at the box center subtracted), which the estimates apply to
/// verbatim and which makes every reported constant insensitive to
/// affine offsets and exactly scale invariant.
struct EstimateReport {
    double lhs = 0.0;
    double rhs_functional = 0.0;
    double measured_constant = 0.0;
    std::vector<double> refinement_trend;
};

/// u minus its first-order finite-difference jet at the central lattice
/// point.
GridFunction affine_reduced(const GridFunction& u);

/// Interior Hoelder quotient sup d_{x,y}^{n+alpha} |u(x)-u(y)| / |x-y|^alpha
/// over the sub-box at distance inner_margin from the boundary, against
/// the L1 mass of u there; alpha = 2 - n/k, so k > n/2 is required.
/// Pairs are exhaustive when the sub-box holds at most max_points lattice
/// points, otherwise all pairs among max_points stratified samples.
EstimateReport holder_check(const GridFunction& u, int k, double inner_margin,
                            int max_points = 2000, std::uint64_t seed = 0);

/// Discrete gradient L^q norm over the inner sub-box against the L1 mass
/// over the outer sub-box; q must satisfy 0 < q < nk/(n-k) (no upper
/// bound when k = n).
EstimateReport gradient_lq_check(const GridFunction& u, int k, double q, double inner_margin,
                                 double outer_margin);

/// Bounded-variation functional for the gradient components: the largest
/// discrete integral of d_i u * div(phi) over seeded smooth vector fields
/// phi (bump-modulated random quadratics, rescaled to max |phi| = 1)
/// supported in the inner sub-box.
EstimateReport bv_check(const GridFunction& u, double inner_margin, int field_budget,
                        std::uint64_t seed = 0);

/// Second-order Taylor remainder of u at a lattice point across a
/// decreasing radius list: mean of |h| over B(r) and sup of |h| over
/// B(r/2), both divided by r^2. decay_pass records whether both
/// sequences decrease towards zero modulo the 10 h^2 noise floor.
struct RemainderReport {
    std::vector<double> point;
    std::vector<double> grad;
    SymMatrix hess{1};
    std::vector<double> radii;
    std::vector<double> mean_ratios;
    std::vector<double> sup_ratios;
    double noise_floor = 0.0;
    bool decay_pass = false;
};

RemainderReport taylor_remainder_scan(const GridFunction& u, int k, std::span<const double> point,
                                      std::vector<double> radii);

/// Scaled interior Hoelder bound for the Taylor remainder h on B(point,r):
/// sup |h(y)-h(z)| / ( |y-z|^alpha (r^-alpha mean_{B(2r)}|h| + r^(2-alpha)) )
/// over sampled pairs, reported at r, r/2 and r/4 as the trend.
EstimateReport lemma31_check(const GridFunction& u, int k, std::span<const double> point, double r,
                             int pair_budget, std::uint64_t seed = 0);

} // namespace kh
