#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kh/cones.hpp"
#include "kh/grid.hpp"

namespace kh {

enum class Verdict { pass, fail, inconclusive };

const char* verdict_name(Verdict v);

/// Outcome of one k-convexity test. fail implies worst_margin < -tolerance
/// with the offending location populated. Randomized tests mark their pass
/// verdicts evidence_only; a fail always carries a re-checkable witness
/// (a lattice point for the spectral test, a matrix/bump pair for the weak
/// test, a touching quadratic for the viscosity test).
struct ConvexityReport {
    Verdict verdict = Verdict::inconclusive;
    std::string method;
    double worst_margin = 0.0;
    double tolerance = 0.0; ///< absolute tolerance margins were held to
    std::vector<int> worst_index;
    std::string worst_label;
    bool evidence_only = false;
    /// Whether restricting the definition to j = k alone would have
    /// produced the same verdict. Recorded, never asserted.
    bool k_only_same_verdict = true;
    std::optional<QuadraticSpec> witness;
    long samples_accepted = 0;
};

inline constexpr double kDefaultConvexityTol = 1e-7;

/// Pointwise spectral test: at every interior lattice point the
/// finite-difference Hessian spectrum must lie in the order-k cone.
/// tol_rel is taken relative to the largest |S_j| seen on the grid.
ConvexityReport spectral_test(const GridFunction& u, int k, double tol_rel = kDefaultConvexityTol);

struct WeakTestParams {
    std::vector<std::vector<double>> centers; ///< bump centers
    double radius = 0.0;                      ///< common bump radius
    double tol_rel = kDefaultConvexityTol;    ///< relative to the discrete L1 norm of u
    std::uint64_t seed = 0;
    int randoms_per_bump = 32;
};

/// Weak-form test: for every bump phi and every probe matrix A with
/// spectrum in the order-2 dual cone (k = 1 uses only the identity),
/// the discrete integral sum u(x) sum_ij a^ij d_ij phi(x) h^n must be
/// >= -tol. Probes are the explicit family, seeded random cone samples,
/// and the closed-form adversarial minimum over the whole cone.
ConvexityReport weak_integral_test(const GridFunction& u, int k, const WeakTestParams& params);

/// Reasonable default bump layout: 3^n centers on the interior of the box
/// plus the box center, radius chosen to fit.
WeakTestParams default_weak_params(const GridFunction& u, std::uint64_t seed = 0);

/// Randomized viscosity test: search for a quadratic that touches u from
/// above at an interior lattice point (strict local max of u - q on the
/// 3^n neighborhood) while violating S_j(lambda(Q)) >= -tol for some
/// j <= k. A found violation is returned as a fail with the quadratic as
/// witness; exhausting the budget is an evidence-only pass.
ConvexityReport viscosity_test(const GridFunction& u, int k, int budget, std::uint64_t seed,
                               double tol_rel = kDefaultConvexityTol);

/// Strict agreement of several reports: the common verdict when all
/// agree, inconclusive otherwise.
Verdict consensus(const std::vector<ConvexityReport>& reports);

} // namespace kh
