#include "kh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kh {

namespace {

void check_dim(int n) {
    if (n < 1) throw DimensionOutOfRange("dimension must be >= 1, got " + std::to_string(n));
    if (n > kMaxDim)
        throw DimensionOutOfRange("dimension " + std::to_string(n) + " exceeds cap " +
                                  std::to_string(kMaxDim));
}

void check_finite(double x) {
    if (!std::isfinite(x)) throw NonFiniteValue("non-finite matrix entry");
}

} // namespace

SymMatrix::SymMatrix(int n) : n_(n) {
    check_dim(n);
    a_.assign(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0);
}

SymMatrix SymMatrix::identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
    SymMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) {
        check_finite(d[static_cast<std::size_t>(i)]);
        m.at(i, i) = d[static_cast<std::size_t>(i)];
    }
    return m;
}

SymMatrix SymMatrix::from_rows(int n, std::span<const double> rows) {
    check_dim(n);
    if (rows.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw DimensionMismatch("row-major data has wrong size");
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double u = rows[static_cast<std::size_t>(i) * n + j];
            const double l = rows[static_cast<std::size_t>(j) * n + i];
            check_finite(u);
            if (u != l) throw InvalidSpec("matrix is not symmetric");
            m.at(i, j) = u;
        }
    }
    return m;
}

std::size_t SymMatrix::pack(int i, int j) const {
    if (i > j) std::swap(i, j);
    // row-major upper triangle: row i starts at i*n - i(i-1)/2 - i offset form
    return static_cast<std::size_t>(i) * (2 * n_ - i - 1) / 2 + static_cast<std::size_t>(j);
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += at(i, i);
    return t;
}

double SymMatrix::frobenius_norm() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) s += at(i, j) * at(i, j);
    return std::sqrt(s);
}

double SymMatrix::off_diagonal_norm() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) s += 2.0 * at(i, j) * at(i, j);
    return std::sqrt(s);
}

SymMatrix SymMatrix::principal_submatrix(std::span<const int> rows) const {
    SymMatrix sub(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i; j < rows.size(); ++j)
            sub.at(static_cast<int>(i), static_cast<int>(j)) = at(rows[i], rows[j]);
    return sub;
}

Spectrum::Spectrum(std::vector<double> values) : v_(std::move(values)) {
    check_dim(static_cast<int>(v_.size()));
    for (double x : v_) check_finite(x);
    std::sort(v_.begin(), v_.end(), std::greater<double>());
}

Spectrum eigenvalues(const SymMatrix& m, double tol) {
    if (!(tol > 0.0)) throw InvalidTolerance("eigenvalue tolerance must be > 0");
    const int n = m.dim();
    if (n == 1) return Spectrum({m.at(0, 0)});

    // Working copy as a full square for simple rotation updates.
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = m.at(i, j);
    auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };

    // d carries current diagonal; b/z accumulate rotation corrections per
    // sweep so the diagonal is re-synced from fresh sums (keeps the trace
    // tight over many rotations).
    std::vector<double> d(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n)),
        z(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] = A(i, i);

    constexpr int kMaxSweeps = 50;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off2 = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off2 += 2.0 * A(p, q) * A(p, q);
        if (std::sqrt(off2) <= tol) {
            std::vector<double> out(d);
            return Spectrum(std::move(out));
        }

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                const double g = 100.0 * std::fabs(apq);
                double t;
                const double diff = d[static_cast<std::size_t>(q)] - d[static_cast<std::size_t>(p)];
                if (std::fabs(diff) + g == std::fabs(diff)) {
                    t = apq / diff;
                } else {
                    const double theta = 0.5 * diff / apq;
                    t = 1.0 / (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double h = t * apq;
                z[static_cast<std::size_t>(p)] -= h;
                z[static_cast<std::size_t>(q)] += h;
                d[static_cast<std::size_t>(p)] -= h;
                d[static_cast<std::size_t>(q)] += h;
                A(p, q) = 0.0;
                auto rotate = [&](int i, int j, int k, int l) {
                    const double gij = A(i, j);
                    const double hkl = A(k, l);
                    A(i, j) = gij - s * (hkl + gij * tau);
                    A(k, l) = hkl + s * (gij - hkl * tau);
                };
                for (int i = 0; i < p; ++i) rotate(i, p, i, q);
                for (int i = p + 1; i < q; ++i) rotate(p, i, i, q);
                for (int i = q + 1; i < n; ++i) rotate(p, i, q, i);
            }
        }
        for (int i = 0; i < n; ++i) {
            b[static_cast<std::size_t>(i)] += z[static_cast<std::size_t>(i)];
            d[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)];
            z[static_cast<std::size_t>(i)] = 0.0;
        }
    }
    throw NonConvergence("Jacobi sweep limit (50) exceeded");
}

double elementary_symmetric(std::span<const double> values, int k) {
    const int n = static_cast<int>(values.size());
    if (k < 1 || k > n)
        throw KOutOfRange("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    for (int m = 0; m < n; ++m) {
        const double x = values[static_cast<std::size_t>(m)];
        const int top = std::min(k, m + 1);
        for (int j = top; j >= 1; --j)
            e[static_cast<std::size_t>(j)] += x * e[static_cast<std::size_t>(j) - 1];
    }
    return e[static_cast<std::size_t>(k)];
}

double elementary_symmetric(const Spectrum& spectrum, int k) {
    return elementary_symmetric(spectrum.values(), k);
}

double k_trace(const SymMatrix& m, int k) {
    if (k < 1 || k > m.dim())
        throw KOutOfRange("k = " + std::to_string(k) + " outside [1, " + std::to_string(m.dim()) + "]");
    return elementary_symmetric(eigenvalues(m), k);
}

namespace {

double det_gauss(SymMatrix sub) {
    // Partial-pivot elimination on a dense copy; fine for k <= 8.
    const int n = sub.dim();
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = sub.at(i, j);
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[static_cast<std::size_t>(r) * n + col]) >
                std::fabs(a[static_cast<std::size_t>(piv) * n + col]))
                piv = r;
        if (a[static_cast<std::size_t>(piv) * n + col] == 0.0) return 0.0;
        if (piv != col) {
            for (int j = 0; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(piv) * n + j],
                          a[static_cast<std::size_t>(col) * n + j]);
            det = -det;
        }
        const double p = a[static_cast<std::size_t>(col) * n + col];
        det *= p;
        for (int r = col + 1; r < n; ++r) {
            const double f = a[static_cast<std::size_t>(r) * n + col] / p;
            for (int j = col; j < n; ++j)
                a[static_cast<std::size_t>(r) * n + j] -= f * a[static_cast<std::size_t>(col) * n + j];
        }
    }
    return det;
}

} // namespace

double k_trace_minors(const SymMatrix& m, int k) {
    const int n = m.dim();
    if (k < 1 || k > n)
        throw KOutOfRange("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    if (n > 8) throw DimensionOutOfRange("minor enumeration limited to n <= 8");
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    double sum = 0.0;
    for (;;) {
        sum += det_gauss(m.principal_submatrix(idx));
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < k; ++i)
            idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i) - 1] + 1;
    }
    return sum;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

} // namespace kh
