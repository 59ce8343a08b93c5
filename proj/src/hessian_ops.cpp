#include "kh/hessian_ops.hpp"

#include <cmath>
#include <string>

namespace kh {

double f_k_at(const GridFunction& u, std::span<const int> idx, int k) {
    if (k < 1 || k > u.dim())
        throw KOutOfRange("k = " + std::to_string(k) + " outside [1, " + std::to_string(u.dim()) + "]");
    return k_trace(hessian_fd(u, idx), k);
}

Spectrum radial_spectrum(const RadialSpectrumFormula& f, double r) {
    if (!(r > 0.0)) throw NonpositiveRadius("radial spectrum needs r > 0");
    if (f.n < 1 || f.n > kMaxDim) throw DimensionOutOfRange("radial spectrum dimension");
    if (!(f.beta > 0.0)) throw InvalidSpec("radial power requires beta > 0");
    const double tangential = f.sigma * f.beta * std::pow(r, f.beta - 2.0);
    const double radial = tangential * (f.beta - 1.0);
    std::vector<double> values(static_cast<std::size_t>(f.n), tangential);
    values[0] = radial;
    return Spectrum(std::move(values));
}

double radial_s_j_bracket(int n, int j, double beta) {
    return binomial(n - 1, j) + (beta - 1.0) * binomial(n - 1, j - 1);
}

RadialThresholdReport radial_kconvexity_threshold(int n, int k) {
    if (n < 1 || n > kMaxDim) throw DimensionOutOfRange("threshold dimension");
    if (k < 1 || k > n)
        throw KOutOfRange("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");

    RadialThresholdReport report;
    report.beta_star = 2.0 - static_cast<double>(n) / k;

    // The bracket is increasing in beta, so the sweep finds the first
    // admissible step; the closed form pins the exact value.
    const double step = 1e-3;
    const double lo = report.beta_star - 0.5;
    const double hi = report.beta_star + 0.5;
    report.swept_threshold = hi;
    const int count = static_cast<int>(std::round((hi - lo) / step)) + 1;
    bool found = false;
    for (int i = 0; i < count; ++i) {
        const double beta = lo + step * i;
        double min_bracket = radial_s_j_bracket(n, 1, beta);
        for (int j = 2; j <= k; ++j)
            min_bracket = std::min(min_bracket, radial_s_j_bracket(n, j, beta));
        const bool admissible = beta > 0.0 && min_bracket >= -1e-12;
        report.table.push_back({beta, min_bracket, admissible});
        if (admissible && !found) {
            report.swept_threshold = beta;
            found = true;
        }
    }
    return report;
}

} // namespace kh
