#include "kh/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kh/hessian_ops.hpp"

namespace kh {

double unit_ball_volume(int n) {
    return std::pow(3.14159265358979323846264338327950288, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

const char* probe_status_name(DensityProbe::Status s) {
    switch (s) {
        case DensityProbe::Status::regular: return "regular";
        case DensityProbe::Status::singular: return "singular";
        default: return "inconclusive";
    }
}

namespace {

// Cells the mollified sub-grid loses per face: the kernel footprint plus
// one cell of finite-difference margin.
double mollify_slack(double eps, double h) {
    int m = static_cast<int>(std::floor(eps / h));
    while (m * h >= eps) --m;
    while ((m + 1) * h < eps) ++m;
    return (m + 2) * h;
}

void check_room(const GridFunction& u, std::span<const double> center, double reach,
                const char* who) {
    const double h = u.spacing();
    for (int a = 0; a < u.dim(); ++a) {
        const double lo = u.origin()[static_cast<std::size_t>(a)];
        const double hi = lo + h * (u.extents()[static_cast<std::size_t>(a)] - 1);
        if (center[static_cast<std::size_t>(a)] - reach < lo ||
            center[static_cast<std::size_t>(a)] + reach > hi)
            throw BallOutOfDomain(std::string(who) + ": ball of reach " + std::to_string(reach) +
                                  " leaves the grid");
    }
}

// Mollifies just enough of u around B(center, r) and integrates the
// k-Hessian of the result over cells strictly inside the ball, in fixed
// lattice order.
double ball_mass(const GridFunction& u, int k, std::span<const double> center, double r,
                 double eps) {
    const int n = u.dim();
    const double h = u.spacing();

    // Region in full-mollified-grid indices covering the ball plus the
    // finite-difference margin.
    int m = static_cast<int>(std::floor(eps / h));
    while (m * h >= eps) --m;
    while ((m + 1) * h < eps) ++m;
    const int shrink = m + 1;

    std::vector<int> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        const double moll_origin = u.origin()[static_cast<std::size_t>(a)] + h * shrink;
        const int cells = u.extents()[static_cast<std::size_t>(a)] - 2 * shrink;
        int lo_i = static_cast<int>(std::floor((center[static_cast<std::size_t>(a)] - r - moll_origin) / h)) - 1;
        int hi_i = static_cast<int>(std::ceil((center[static_cast<std::size_t>(a)] + r - moll_origin) / h)) + 1;
        lo_i = std::max(lo_i, 0);
        hi_i = std::min(hi_i, cells - 1);
        if (hi_i - lo_i + 1 < 5) {
            // Widen symmetrically so the region grid stays constructible.
            while (hi_i - lo_i + 1 < 5 && lo_i > 0) --lo_i;
            while (hi_i - lo_i + 1 < 5 && hi_i < cells - 1) ++hi_i;
        }
        lo[static_cast<std::size_t>(a)] = lo_i;
        hi[static_cast<std::size_t>(a)] = hi_i;
    }
    const GridFunction w = mollify_region(u, eps, lo, hi);

    const double cell = std::pow(h, n);
    const double r2 = r * r;
    double mass = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(n), 1);
    std::vector<int> top(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) top[static_cast<std::size_t>(a)] = w.extents()[static_cast<std::size_t>(a)] - 2;
    for (;;) {
        double d2 = 0.0;
        for (int a = 0; a < n; ++a) {
            const double d = w.coordinate(a, idx[static_cast<std::size_t>(a)]) -
                             center[static_cast<std::size_t>(a)];
            d2 += d * d;
        }
        if (d2 < r2) mass += f_k_at(w, idx, k) * cell;
        int axis = n - 1;
        while (axis >= 0 && idx[static_cast<std::size_t>(axis)] == top[static_cast<std::size_t>(axis)]) {
            idx[static_cast<std::size_t>(axis)] = 1;
            --axis;
        }
        if (axis < 0) break;
        ++idx[static_cast<std::size_t>(axis)];
    }
    return mass;
}

} // namespace

MeasureEstimate hessian_measure_ball(const GridFunction& u, int k, std::vector<double> center,
                                     std::vector<double> radii, std::vector<double> eps_levels) {
    const int n = u.dim();
    if (k < 1 || k > n)
        throw KOutOfRange("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    if (center.size() != static_cast<std::size_t>(n)) throw DimensionMismatch("center dimension");
    if (radii.empty() || eps_levels.empty())
        throw InvalidSpec("need at least one radius and one mollification level");
    for (double r : radii)
        if (!(r > 0.0)) throw NonpositiveRadius("radii must be positive");

    const double h = u.spacing();
    const double max_r = *std::max_element(radii.begin(), radii.end());
    const double max_eps = *std::max_element(eps_levels.begin(), eps_levels.end());
    const double min_eps = *std::min_element(eps_levels.begin(), eps_levels.end());
    check_room(u, center, max_r + mollify_slack(max_eps, h), "hessian_measure_ball");

    // k-convexity pre-check on the finest mollification.
    const ConvexityReport pre = spectral_test(mollify(u, min_eps), k);
    if (pre.verdict != Verdict::pass)
        throw NotKConvex("k-convexity pre-check failed (spectral margin " +
                         std::to_string(pre.worst_margin) + ")");

    MeasureEstimate est;
    est.center = std::move(center);
    est.radii = std::move(radii);
    est.eps_levels = std::move(eps_levels);
    est.masses.resize(est.eps_levels.size());
    for (std::size_t e = 0; e < est.eps_levels.size(); ++e) {
        est.masses[e].resize(est.radii.size());
        for (std::size_t r = 0; r < est.radii.size(); ++r)
            est.masses[e][r] = ball_mass(u, k, est.center, est.radii[r], est.eps_levels[e]);
    }
    est.cauchy_diffs.resize(est.eps_levels.size() > 1 ? est.eps_levels.size() - 1 : 0);
    for (std::size_t e = 1; e < est.eps_levels.size(); ++e) {
        est.cauchy_diffs[e - 1].resize(est.radii.size());
        for (std::size_t r = 0; r < est.radii.size(); ++r)
            est.cauchy_diffs[e - 1][r] = std::fabs(est.masses[e][r] - est.masses[e - 1][r]);
    }
    return est;
}

DensityProbe density_probe(const GridFunction& u, int k, std::vector<double> point,
                           std::vector<double> radii_schedule, double eps_factor) {
    const int n = u.dim();
    if (k < 1 || k > n)
        throw KOutOfRange("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    if (point.size() != static_cast<std::size_t>(n)) throw DimensionMismatch("probe point dimension");
    if (radii_schedule.size() < 2)
        throw InvalidSpec("density probe needs at least two radii");
    for (std::size_t i = 1; i < radii_schedule.size(); ++i)
        if (!(radii_schedule[i] < radii_schedule[i - 1]))
            throw InvalidSpec("radii schedule must be strictly decreasing");
    if (!(radii_schedule.back() > 0.0)) throw NonpositiveRadius("radii must be positive");
    if (!(eps_factor > 0.0)) throw InvalidSpec("eps factor must be positive");

    const double h = u.spacing();
    for (double r : radii_schedule) {
        const double eps = eps_factor * r;
        check_room(u, point, r + mollify_slack(eps, h), "density_probe");
        if (!(eps >= 3.0 * h))
            throw EpsilonTooSmall("schedule radius " + std::to_string(r) +
                                  " gives eps < 3 * spacing");
    }

    DensityProbe probe;
    probe.point = point;
    probe.radii = radii_schedule;
    const double omega = unit_ball_volume(n);
    for (double r : radii_schedule) {
        const double eps = eps_factor * r;
        probe.eps_used.push_back(eps);
        const double mass = ball_mass(u, k, point, r, eps);
        probe.ratios.push_back(mass / (omega * std::pow(r, n)));
    }

    // Density at the probe point from the finest mollification.
    {
        const double eps = probe.eps_used.back();
        int m = static_cast<int>(std::floor(eps / h));
        while (m * h >= eps) --m;
        while ((m + 1) * h < eps) ++m;
        const int shrink = m + 1;
        std::vector<int> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) {
            const double moll_origin = u.origin()[static_cast<std::size_t>(a)] + h * shrink;
            const int cells = u.extents()[static_cast<std::size_t>(a)] - 2 * shrink;
            int c = static_cast<int>(std::round((point[static_cast<std::size_t>(a)] - moll_origin) / h));
            int lo_i = std::max(0, c - 3);
            int hi_i = std::min(cells - 1, c + 3);
            while (hi_i - lo_i + 1 < 5 && lo_i > 0) --lo_i;
            while (hi_i - lo_i + 1 < 5 && hi_i < cells - 1) ++hi_i;
            lo[static_cast<std::size_t>(a)] = lo_i;
            hi[static_cast<std::size_t>(a)] = hi_i;
        }
        const GridFunction w = mollify_region(u, eps, lo, hi);
        probe.f_k_value = f_k_at(w, w.nearest_index(point), k);
    }

    // Stability: relative Cauchy criterion with an absolute floor so
    // vanishing densities register as stable rather than noisy. The floor
    // is the density resolution of the probe; values below it read as 0.
    auto stable = [](double a, double b) {
        return std::fabs(a - b) <= std::max(0.05 * std::max(std::fabs(a), std::fabs(b)), 1e-2);
    };
    int stable_at = -1;
    for (std::size_t i = 1; i < probe.ratios.size(); ++i)
        if (stable(probe.ratios[i - 1], probe.ratios[i])) stable_at = static_cast<int>(i);

    bool diverging = true;
    for (std::size_t i = 1; i < probe.ratios.size(); ++i) {
        if (!(probe.ratios[i] >= 2.0 * probe.ratios[i - 1]) || !(probe.ratios[i] > 0.0)) {
            diverging = false;
            break;
        }
    }

    if (stable_at >= 0) {
        probe.status = DensityProbe::Status::regular;
        probe.stable_r = probe.radii[static_cast<std::size_t>(stable_at)];
        probe.h_estimate = probe.ratios[static_cast<std::size_t>(stable_at)];
        probe.singular_flag = false;
        probe.relative_gap = std::fabs(probe.h_estimate - probe.f_k_value) /
                             std::max(1.0, std::fabs(probe.f_k_value));
        return probe;
    }
    if (diverging) {
        probe.status = DensityProbe::Status::singular;
        probe.singular_flag = true;
        probe.h_estimate = probe.ratios.back();
        probe.relative_gap = std::fabs(probe.h_estimate - probe.f_k_value) /
                             std::max(1.0, std::fabs(probe.f_k_value));
        return probe;
    }
    probe.status = DensityProbe::Status::inconclusive;
    probe.h_estimate = probe.ratios.back();
    probe.relative_gap = std::fabs(probe.h_estimate - probe.f_k_value) /
                         std::max(1.0, std::fabs(probe.f_k_value));
    throw ScheduleExhausted("density probe neither stabilized nor diverged", probe);
}

DecompositionSummary decomposition_report(const GridFunction& u, int k,
                                          const std::vector<std::vector<double>>& probe_points,
                                          std::vector<double> radii_schedule, double eps_factor) {
    DecompositionSummary summary;
    for (const auto& p : probe_points) {
        DensityProbe probe;
        try {
            probe = density_probe(u, k, p, radii_schedule, eps_factor);
        } catch (const ScheduleExhausted& ex) {
            probe = ex.probe;
        }
        switch (probe.status) {
            case DensityProbe::Status::regular:
                ++summary.regular;
                summary.max_relative_gap = std::max(summary.max_relative_gap, probe.relative_gap);
                break;
            case DensityProbe::Status::singular: ++summary.singular; break;
            default: ++summary.inconclusive; break;
        }
        summary.probes.push_back(std::move(probe));
    }
    return summary;
}

} // namespace kh
