#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kh/linalg.hpp"

namespace kh {

/// Cone index pair: ambient dimension n and cone order k, 1 <= k <= n.
struct ConeSpec {
    int n = 0;
    int k = 0;
};

/// Outcome of a membership test. margin is a signed distance proxy: the
/// minimal S_j value for the primal cones, the minimal (slack or inner
/// product) found for the dual cones. For the numeric dual test a false
/// verdict carries a checkable witness direction; a true verdict is
/// evidence only (see certified_nonmember).
struct ConeVerdict {
    bool member = false;
    double margin = 0.0;
    std::optional<std::vector<double>> witness;
    /// True when member == false is backed by an explicit witness that
    /// can be re-verified (always the case for the exact tests).
    bool certified_nonmember = false;
};

inline constexpr double kDefaultConeTol = 1e-9;

/// Membership in the cone { lambda : S_j(lambda) >= 0 for j = 1..k }.
/// member iff min_{1<=j<=k} S_j >= -tol; margin is that minimum.
ConeVerdict in_gamma_k(const Spectrum& lambda, ConeSpec cone, double tol = kDefaultConeTol);

/// Exact dual-cone membership for the three orders with closed forms:
///   k = 1: nonnegative multiples of (1,...,1); margin
///          min(mean, -max deviation from mean).
///   k = 2: lambda in the positive orthant with
///          |lambda|^2 <= (sum lambda)^2/(n-1); margin is the smaller of
///          min_i lambda_i and the quadratic slack.
///   k = n: positive orthant; margin min_i lambda_i.
/// UnsupportedK otherwise.
ConeVerdict in_gamma_star_exact(const Spectrum& lambda, ConeSpec cone,
                                double tol = kDefaultConeTol);

/// Numeric dual-cone membership for any 1 <= k <= n: minimizes
/// <lambda, mu> over unit vectors mu in the primal cone by seeded sphere
/// sampling filtered through in_gamma_k, then coordinate descent from the
/// best sample (step halving down to 1e-6). member iff the best value is
/// >= -tol. A false verdict is certified by its witness; a true verdict
/// is evidence only.
ConeVerdict in_gamma_star_numeric(const Spectrum& lambda, ConeSpec cone, int budget,
                                  double tol = kDefaultConeTol, std::uint64_t seed = 0);

/// Largest admissible off-diagonal coupling for the explicit test-matrix
/// family: sqrt(n / (2(n-1))).
double coupling_bound(int n);

/// The explicit family of 1 + n + n(n-1)/2 symmetric matrices whose
/// spectra lie in the order-2 dual cone: the identity, the diagonal
/// matrices with one zero entry, and the symmetric couplings
/// I + t(e_i (x) e_j + e_j (x) e_i) for i < j. Requires
/// 0 < t < coupling_bound(n).
std::vector<SymMatrix> test_matrix_family(int n, double t);

/// Smallest s such that (1, s, ..., s) lies in the order-2 dual cone:
/// (n-2)/(2(n-1)). Directions of this shape are the extreme rays used by
/// adversarial searches over that cone.
double gamma2_star_extreme_ratio(int n);

/// min over unit vectors mu in the order-2 dual cone of the sorted
/// adversarial pairing sum_i mu_i^(desc) * v_i^(asc). Seeded sampling plus
/// coordinate descent; exact closed-form extreme candidates are always
/// included as starts.
double min_gamma2_star_pairing(std::span<const double> v, int budget, std::uint64_t seed);

} // namespace kh
