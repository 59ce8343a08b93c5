#pragma once

#include <span>
#include <vector>

#include "kh/grid.hpp"
#include "kh/linalg.hpp"

namespace kh {

/// k-Hessian value at an interior lattice point: the k-trace of the
/// finite-difference Hessian. k = 1 is the discrete Laplacian, k = n the
/// discrete Monge-Ampere determinant.
double f_k_at(const GridFunction& u, std::span<const int> idx, int k);

/// Hessian eigenvalue structure of sigma * |x|^beta: one radial
/// eigenvalue sigma*beta*(beta-1)*r^(beta-2) and n-1 tangential
/// eigenvalues sigma*beta*r^(beta-2).
struct RadialSpectrumFormula {
    int n = 0;
    double sigma = 1.0;
    double beta = 1.0;
};

Spectrum radial_spectrum(const RadialSpectrumFormula& f, double r);

/// S_j of the radial spectrum factors as (beta r^(beta-2))^j times this
/// bracket: C(n-1,j) + (beta-1) C(n-1,j-1). Its sign decides
/// k-convexity of |x|^beta independently of r.
double radial_s_j_bracket(int n, int j, double beta);

struct RadialThresholdReport {
    double beta_star = 0.0;       ///< 2 - n/k
    double swept_threshold = 0.0; ///< smallest admissible beta found by the sweep
    struct Row {
        double beta = 0.0;
        double min_bracket = 0.0; ///< min over j <= k of the S_j bracket
        bool admissible = false;
    };
    std::vector<Row> table;
};

/// The k-convexity threshold of the radial power family: returns
/// beta* = 2 - n/k together with a sign sweep of the closed-form S_j
/// brackets over beta (step 1e-3), certifying the threshold to +-1e-3.
RadialThresholdReport radial_kconvexity_threshold(int n, int k);

} // namespace kh
