#pragma once

#include <span>
#include <vector>

#include "kh/errors.hpp"

namespace kh {

/// Largest supported matrix / spectrum dimension. The ambient dimensions
/// in this library are small and fixed; grids dominate cost elsewhere.
inline constexpr int kMaxDim = 16;

/// Dense real symmetric matrix with single storage per (i,j) pair
/// (packed upper triangle, row major).
class SymMatrix {
public:
    explicit SymMatrix(int n);

    static SymMatrix identity(int n);
    static SymMatrix diagonal(std::span<const double> d);
    /// Builds from a full row-major n*n array; requires symmetry to 0.
    static SymMatrix from_rows(int n, std::span<const double> rows);

    int dim() const { return n_; }

    double& at(int i, int j) { return a_[pack(i, j)]; }
    double at(int i, int j) const { return a_[pack(i, j)]; }

    double trace() const;
    double frobenius_norm() const;
    /// Frobenius norm of the off-diagonal part (both triangles).
    double off_diagonal_norm() const;
    /// Largest |eigenvalue| upper bound is not provided here; use
    /// eigenvalues() and take the extremes.

    /// Principal submatrix for the given sorted index subset.
    SymMatrix principal_submatrix(std::span<const int> rows) const;

    std::span<const double> packed() const { return a_; }

private:
    std::size_t pack(int i, int j) const;
    int n_ = 0;
    std::vector<double> a_;
};

/// Eigenvalue vector, stored in non-increasing order.
class Spectrum {
public:
    explicit Spectrum(std::vector<double> values); // sorts non-increasing
    int dim() const { return static_cast<int>(v_.size()); }
    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
    std::span<const double> values() const { return v_; }

private:
    std::vector<double> v_;
};

/// All eigenvalues of m by cyclic Jacobi rotations, sorted non-increasing.
/// Terminates when the off-diagonal Frobenius norm is <= tol; at most 50
/// sweeps, then NonConvergence. InvalidTolerance if tol <= 0.
Spectrum eigenvalues(const SymMatrix& m, double tol = 1e-12);

/// k-th elementary symmetric polynomial S_k of the given values,
/// 1 <= k <= n. Computed by the one-pass product-expansion recurrence
/// e_k^(m) = e_k^(m-1) + x_m e_{k-1}^(m-1), which avoids the cancellation
/// Newton's identities suffer on mixed-sign inputs.
double elementary_symmetric(std::span<const double> values, int k);
double elementary_symmetric(const Spectrum& spectrum, int k);

/// Sum of all k x k principal minors of m (the k-trace), via the
/// eigenvalue route: S_k(eigenvalues(m)).
double k_trace(const SymMatrix& m, int k);

/// Same quantity by direct enumeration of all C(n,k) principal minors
/// (Gaussian-elimination determinants). Only for n <= 8; serves as the
/// independent second route for the eigenvalue path.
double k_trace_minors(const SymMatrix& m, int k);

/// Binomial coefficient as a double (exact for the small n used here).
double binomial(int n, int k);

} // namespace kh
