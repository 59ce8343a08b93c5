#include "kh/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kh/rng.hpp"

namespace kh {

namespace {

struct Box {
    std::vector<int> lo, hi;       // inclusive index bounds
    std::vector<double> lo_c, hi_c; // coordinate bounds
};

Box inner_box(const GridFunction& u, double margin, int min_cells) {
    const int n = u.dim();
    const double h = u.spacing();
    Box box;
    box.lo.resize(static_cast<std::size_t>(n));
    box.hi.resize(static_cast<std::size_t>(n));
    box.lo_c.resize(static_cast<std::size_t>(n));
    box.hi_c.resize(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        int il = static_cast<int>(std::ceil(margin / h - 1e-12));
        il = std::max(il, 1); // finite differences need one cell anyway
        const int ih = u.extents()[static_cast<std::size_t>(a)] - 1 - il;
        if (ih - il + 1 < min_cells) throw GridTooSmall("inner sub-box too small");
        box.lo[static_cast<std::size_t>(a)] = il;
        box.hi[static_cast<std::size_t>(a)] = ih;
        box.lo_c[static_cast<std::size_t>(a)] = u.coordinate(a, il);
        box.hi_c[static_cast<std::size_t>(a)] = u.coordinate(a, ih);
    }
    return box;
}

double box_l1(const GridFunction& u, const Box& box) {
    const int n = u.dim();
    std::vector<int> idx = box.lo;
    double sum = 0.0;
    for (;;) {
        sum += std::fabs(u.at(idx));
        int axis = n - 1;
        while (axis >= 0 && idx[static_cast<std::size_t>(axis)] == box.hi[static_cast<std::size_t>(axis)]) {
            idx[static_cast<std::size_t>(axis)] = box.lo[static_cast<std::size_t>(axis)];
            --axis;
        }
        if (axis < 0) break;
        ++idx[static_cast<std::size_t>(axis)];
    }
    return sum * std::pow(u.spacing(), n);
}

// Distance (in coordinates) from x to the boundary of the sub-box.
double dist_to_box_boundary(const Box& box, std::span<const double> x) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < box.lo_c.size(); ++a)
        d = std::min({d, x[a] - box.lo_c[a], box.hi_c[a] - x[a]});
    return d;
}

// All lattice points of the box when few enough, otherwise one seeded
// representative per stratum of a regular blocking.
std::vector<std::vector<int>> sample_points(const GridFunction& u, const Box& box, int max_points,
                                            std::uint64_t seed) {
    const int n = u.dim();
    std::int64_t total = 1;
    for (int a = 0; a < n; ++a)
        total *= box.hi[static_cast<std::size_t>(a)] - box.lo[static_cast<std::size_t>(a)] + 1;

    std::vector<std::vector<int>> points;
    if (total <= max_points) {
        std::vector<int> idx = box.lo;
        for (;;) {
            points.push_back(idx);
            int axis = n - 1;
            while (axis >= 0 && idx[static_cast<std::size_t>(axis)] == box.hi[static_cast<std::size_t>(axis)]) {
                idx[static_cast<std::size_t>(axis)] = box.lo[static_cast<std::size_t>(axis)];
                --axis;
            }
            if (axis < 0) break;
            ++idx[static_cast<std::size_t>(axis)];
        }
        return points;
    }

    const int per_axis = std::max(1, static_cast<int>(std::floor(
                                         std::pow(static_cast<double>(max_points), 1.0 / n))));
    Rng rng = Rng(seed).split(0x737472);
    std::vector<int> stratum(static_cast<std::size_t>(n), 0);
    for (;;) {
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) {
            const int lo = box.lo[static_cast<std::size_t>(a)];
            const int hi = box.hi[static_cast<std::size_t>(a)];
            const double w = static_cast<double>(hi - lo + 1) / per_axis;
            const int s = stratum[static_cast<std::size_t>(a)];
            const int cell_lo = lo + static_cast<int>(std::floor(s * w));
            const int cell_hi = std::min(hi, lo + static_cast<int>(std::floor((s + 1) * w)) - 1);
            idx[static_cast<std::size_t>(a)] =
                static_cast<int>(rng.uniform_int(cell_lo, std::max(cell_lo, cell_hi)));
        }
        points.push_back(std::move(idx));
        int axis = n - 1;
        while (axis >= 0 && stratum[static_cast<std::size_t>(axis)] == per_axis - 1) {
            stratum[static_cast<std::size_t>(axis)] = 0;
            --axis;
        }
        if (axis < 0) break;
        ++stratum[static_cast<std::size_t>(axis)];
    }
    return points;
}

double hoelder_alpha(const GridFunction& u, int k) {
    const int n = u.dim();
    if (k < 1 || k > n)
        throw KOutOfRange("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    if (2 * k <= n)
        throw KTooSmall("estimate requires k > n/2 (n = " + std::to_string(n) + ", k = " +
                        std::to_string(k) + ")");
    return 2.0 - static_cast<double>(n) / k;
}

// Taylor remainder of u against its finite-difference jet at idx0.
struct JetRemainder {
    const GridFunction* u;
    std::vector<int> idx0;
    std::vector<double> x0;
    std::vector<double> grad;
    SymMatrix hess{1};

    JetRemainder(const GridFunction& grid, std::span<const int> at)
        : u(&grid), idx0(at.begin(), at.end()), x0(grid.point(at)), grad(gradient_fd(grid, at)),
          hess(hessian_fd(grid, at)) {}

    double operator()(std::span<const int> idx) const {
        const int n = u->dim();
        double v = u->at(idx) - u->at(idx0);
        std::vector<double> dy(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a)
            dy[static_cast<std::size_t>(a)] =
                u->spacing() * (idx[static_cast<std::size_t>(a)] - idx0[static_cast<std::size_t>(a)]);
        for (int a = 0; a < n; ++a) {
            v -= grad[static_cast<std::size_t>(a)] * dy[static_cast<std::size_t>(a)];
            for (int b = 0; b < n; ++b)
                v -= 0.5 * hess.at(a, b) * dy[static_cast<std::size_t>(a)] * dy[static_cast<std::size_t>(b)];
        }
        return v;
    }
};

// Fixed-order enumeration of lattice indices with |x - center| < r.
template <typename Fn>
void for_each_ball_point(const GridFunction& u, std::span<const double> center, double r, Fn&& fn) {
    const int n = u.dim();
    const double h = u.spacing();
    std::vector<int> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        lo[static_cast<std::size_t>(a)] = std::max(
            0, static_cast<int>(std::ceil((center[a] - r - u.origin()[static_cast<std::size_t>(a)]) / h)));
        hi[static_cast<std::size_t>(a)] = std::min(
            u.extents()[static_cast<std::size_t>(a)] - 1,
            static_cast<int>(std::floor((center[a] + r - u.origin()[static_cast<std::size_t>(a)]) / h)));
        if (lo[static_cast<std::size_t>(a)] > hi[static_cast<std::size_t>(a)]) return;
    }
    const double r2 = r * r;
    std::vector<int> idx = lo;
    for (;;) {
        double d2 = 0.0;
        for (int a = 0; a < n; ++a) {
            const double d = u.coordinate(a, idx[static_cast<std::size_t>(a)]) - center[a];
            d2 += d * d;
        }
        if (d2 < r2) fn(std::span<const int>(idx));
        int axis = n - 1;
        while (axis >= 0 && idx[static_cast<std::size_t>(axis)] == hi[static_cast<std::size_t>(axis)]) {
            idx[static_cast<std::size_t>(axis)] = lo[static_cast<std::size_t>(axis)];
            --axis;
        }
        if (axis < 0) break;
        ++idx[static_cast<std::size_t>(axis)];
    }
}

} // namespace

GridFunction affine_reduced(const GridFunction& u) {
    const int n = u.dim();
    std::vector<int> center(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) center[static_cast<std::size_t>(a)] = u.extents()[static_cast<std::size_t>(a)] / 2;
    const auto g = gradient_fd(u, center);
    const double u0 = u.at(center);
    const auto x0 = u.point(center);

    std::vector<double> values(u.values().size());
    const std::int64_t total = u.size();
    for (std::int64_t flat = 0; flat < total; ++flat) {
        const auto idx = u.unflatten(flat);
        double v = u[flat] - u0;
        for (int a = 0; a < n; ++a)
            v -= g[static_cast<std::size_t>(a)] *
                 (u.coordinate(a, idx[static_cast<std::size_t>(a)]) - x0[static_cast<std::size_t>(a)]);
        values[static_cast<std::size_t>(flat)] = v;
    }
    return GridFunction(u.extents(), u.origin(), u.spacing(), std::move(values));
}

EstimateReport holder_check(const GridFunction& u, int k, double inner_margin, int max_points,
                            std::uint64_t seed) {
    const double alpha = hoelder_alpha(u, k);
    const int n = u.dim();
    const GridFunction v = affine_reduced(u);
    const Box box = inner_box(v, inner_margin, 3);
    const auto points = sample_points(v, box, max_points, seed);

    double lhs = 0.0;
    std::vector<std::vector<double>> coords;
    std::vector<double> dists, values;
    coords.reserve(points.size());
    for (const auto& idx : points) {
        coords.push_back(v.point(idx));
        dists.push_back(dist_to_box_boundary(box, coords.back()));
        values.push_back(v.at(idx));
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double dist2 = 0.0;
            for (int a = 0; a < n; ++a) {
                const double d = coords[i][static_cast<std::size_t>(a)] - coords[j][static_cast<std::size_t>(a)];
                dist2 += d * d;
            }
            if (dist2 == 0.0) continue;
            const double dxy = std::min(dists[i], dists[j]);
            const double quot = std::pow(dxy, n + alpha) * std::fabs(values[i] - values[j]) /
                                std::pow(std::sqrt(dist2), alpha);
            lhs = std::max(lhs, quot);
        }
    }

    EstimateReport report;
    report.lhs = lhs;
    report.rhs_functional = box_l1(v, box);
    report.measured_constant = report.rhs_functional > 0.0 ? lhs / report.rhs_functional : 0.0;
    report.refinement_trend = {report.measured_constant};
    return report;
}

EstimateReport gradient_lq_check(const GridFunction& u, int k, double q, double inner_margin,
                                 double outer_margin) {
    const int n = u.dim();
    if (k < 1 || k > n)
        throw KOutOfRange("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    const double q_max = k < n ? static_cast<double>(n) * k / (n - k)
                               : std::numeric_limits<double>::infinity();
    if (!(q > 0.0) || !(q < q_max))
        throw QOutOfRange("q = " + std::to_string(q) + " outside (0, " + std::to_string(q_max) + ")");
    if (!(inner_margin > outer_margin))
        throw InvalidSpec("inner margin must exceed outer margin");

    const GridFunction v = affine_reduced(u);
    const Box inner = inner_box(v, inner_margin, 3);
    const Box outer = inner_box(v, outer_margin, 3);

    double acc = 0.0;
    std::vector<int> idx = inner.lo;
    for (;;) {
        const auto g = gradient_fd(v, idx);
        double norm2 = 0.0;
        for (double gi : g) norm2 += gi * gi;
        acc += std::pow(norm2, 0.5 * q);
        int axis = n - 1;
        while (axis >= 0 && idx[static_cast<std::size_t>(axis)] == inner.hi[static_cast<std::size_t>(axis)]) {
            idx[static_cast<std::size_t>(axis)] = inner.lo[static_cast<std::size_t>(axis)];
            --axis;
        }
        if (axis < 0) break;
        ++idx[static_cast<std::size_t>(axis)];
    }

    EstimateReport report;
    report.lhs = std::pow(acc * std::pow(v.spacing(), n), 1.0 / q);
    report.rhs_functional = box_l1(v, outer);
    report.measured_constant = report.rhs_functional > 0.0 ? report.lhs / report.rhs_functional : 0.0;
    report.refinement_trend = {report.measured_constant};
    return report;
}

namespace {

// Random degree-2 polynomial in the bump's local coordinates.
struct LocalQuadratic {
    double c0 = 0.0;
    std::vector<double> lin;
    std::vector<double> quad; // packed upper triangle

    static LocalQuadratic random(int n, Rng& rng) {
        LocalQuadratic p;
        p.c0 = rng.normal();
        p.lin.resize(static_cast<std::size_t>(n));
        for (auto& x : p.lin) x = rng.normal();
        p.quad.resize(static_cast<std::size_t>(n) * (n + 1) / 2);
        for (auto& x : p.quad) x = rng.normal();
        return p;
    }

    double value(std::span<const double> z) const {
        const int n = static_cast<int>(lin.size());
        double v = c0;
        std::size_t t = 0;
        for (int i = 0; i < n; ++i) {
            v += lin[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
            for (int j = i; j < n; ++j, ++t)
                v += quad[t] * z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(j)];
        }
        return v;
    }

    double deriv(std::span<const double> z, int a) const {
        const int n = static_cast<int>(lin.size());
        double v = lin[static_cast<std::size_t>(a)];
        std::size_t t = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j, ++t) {
                if (i == a) v += quad[t] * z[static_cast<std::size_t>(j)];
                if (j == a) v += quad[t] * z[static_cast<std::size_t>(i)];
            }
        return v;
    }
};

} // namespace

EstimateReport bv_check(const GridFunction& u, double inner_margin, int field_budget,
                        std::uint64_t seed) {
    if (field_budget < 1) throw BudgetZero("bv_check needs field_budget >= 1");
    const int n = u.dim();
    const GridFunction v = affine_reduced(u);
    const Box box = inner_box(v, inner_margin, 5);

    double min_half = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a)
        min_half = std::min(min_half, 0.5 * (box.hi_c[static_cast<std::size_t>(a)] -
                                             box.lo_c[static_cast<std::size_t>(a)]));

    Rng root = Rng(seed).split(0x6276);
    std::vector<double> lhs_i(static_cast<std::size_t>(n), 0.0);
    const double cell = std::pow(v.spacing(), n);

    for (int f = 0; f < field_budget; ++f) {
        Rng rng = root.split(static_cast<std::uint64_t>(f));
        const double radius = rng.uniform(0.5 * min_half, 0.95 * min_half);
        std::vector<double> center(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a)
            center[static_cast<std::size_t>(a)] =
                rng.uniform(box.lo_c[static_cast<std::size_t>(a)] + radius,
                            box.hi_c[static_cast<std::size_t>(a)] - radius);

        std::vector<LocalQuadratic> comp;
        comp.reserve(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) comp.push_back(LocalQuadratic::random(n, rng));

        // Rescale so the largest lattice value of |phi| is 1.
        double max_norm = 0.0;
        for_each_ball_point(v, center, radius, [&](std::span<const int> idx) {
            const auto x = v.point(idx);
            std::vector<double> z(static_cast<std::size_t>(n));
            double q = 0.0;
            for (int a = 0; a < n; ++a) {
                z[static_cast<std::size_t>(a)] = (x[static_cast<std::size_t>(a)] - center[static_cast<std::size_t>(a)]) / radius;
                q += z[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(a)];
            }
            const double psi = bump_psi(q);
            double norm2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double pj = psi * comp[static_cast<std::size_t>(j)].value(z);
                norm2 += pj * pj;
            }
            max_norm = std::max(max_norm, std::sqrt(norm2));
        });
        if (max_norm == 0.0) continue;

        std::vector<double> integrals(static_cast<std::size_t>(n), 0.0);
        for_each_ball_point(v, center, radius, [&](std::span<const int> idx) {
            if (!v.is_interior(idx, 1)) return;
            const auto x = v.point(idx);
            std::vector<double> z(static_cast<std::size_t>(n));
            double q = 0.0;
            for (int a = 0; a < n; ++a) {
                z[static_cast<std::size_t>(a)] = (x[static_cast<std::size_t>(a)] - center[static_cast<std::size_t>(a)]) / radius;
                q += z[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(a)];
            }
            const double psi = bump_psi(q);
            const double dpsi = bump_dpsi(q);
            double div = 0.0;
            for (int a = 0; a < n; ++a) {
                const double dq_dxa = 2.0 * z[static_cast<std::size_t>(a)] / radius;
                div += dpsi * dq_dxa * comp[static_cast<std::size_t>(a)].value(z) +
                       psi * comp[static_cast<std::size_t>(a)].deriv(z, a) / radius;
            }
            div /= max_norm;
            const auto grad = gradient_fd(v, idx);
            for (int i = 0; i < n; ++i)
                integrals[static_cast<std::size_t>(i)] += grad[static_cast<std::size_t>(i)] * div * cell;
        });
        for (int i = 0; i < n; ++i)
            lhs_i[static_cast<std::size_t>(i)] =
                std::max(lhs_i[static_cast<std::size_t>(i)], std::fabs(integrals[static_cast<std::size_t>(i)]));
    }

    EstimateReport report;
    report.lhs = *std::max_element(lhs_i.begin(), lhs_i.end());
    report.rhs_functional = box_l1(v, box);
    report.measured_constant = report.rhs_functional > 0.0 ? report.lhs / report.rhs_functional : 0.0;
    report.refinement_trend = {report.measured_constant};
    return report;
}

RemainderReport taylor_remainder_scan(const GridFunction& u, int k, std::span<const double> point,
                                      std::vector<double> radii) {
    hoelder_alpha(u, k); // validates k > n/2
    if (radii.empty()) throw InvalidSpec("taylor scan needs at least one radius");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] < radii[i - 1])) throw InvalidSpec("radii must be strictly decreasing");

    const auto idx0 = u.nearest_index(point);
    const double max_r = radii.front();
    const double h = u.spacing();
    for (int a = 0; a < u.dim(); ++a) {
        const double lo = u.origin()[static_cast<std::size_t>(a)] + h;
        const double hi = u.coordinate(a, u.extents()[static_cast<std::size_t>(a)] - 2);
        const double x = u.coordinate(a, idx0[static_cast<std::size_t>(a)]);
        if (x - max_r < lo || x + max_r > hi)
            throw BoundaryViolation("taylor scan ball leaves the interior");
    }

    const JetRemainder rem(u, idx0);
    RemainderReport report;
    report.point = u.point(idx0);
    report.grad = rem.grad;
    report.hess = rem.hess;
    report.radii = radii;
    report.noise_floor = 10.0 * h * h;

    const auto x0 = u.point(idx0);
    for (double r : radii) {
        double sum = 0.0;
        std::int64_t count = 0;
        for_each_ball_point(u, x0, r, [&](std::span<const int> idx) {
            sum += std::fabs(rem(idx));
            ++count;
        });
        double sup = 0.0;
        std::int64_t sup_count = 0;
        for_each_ball_point(u, x0, 0.5 * r, [&](std::span<const int> idx) {
            sup = std::max(sup, std::fabs(rem(idx)));
            ++sup_count;
        });
        if (count == 0 || sup_count == 0)
            throw InvalidSpec("radius " + std::to_string(r) + " holds no lattice points");
        report.mean_ratios.push_back(sum / count / (r * r));
        report.sup_ratios.push_back(sup / (r * r));
    }

    auto decays = [&](const std::vector<double>& seq) {
        for (std::size_t i = 1; i < seq.size(); ++i)
            if (seq[i] > std::max(seq[i - 1] * (1.0 + 1e-9), report.noise_floor)) return false;
        return true;
    };
    report.decay_pass = decays(report.mean_ratios) && decays(report.sup_ratios);
    return report;
}

EstimateReport lemma31_check(const GridFunction& u, int k, std::span<const double> point, double r,
                             int pair_budget, std::uint64_t seed) {
    const double alpha = hoelder_alpha(u, k);
    if (pair_budget < 1) throw BudgetZero("lemma31_check needs pair_budget >= 1");
    if (!(r > 0.0)) throw NonpositiveRadius("lemma31_check needs r > 0");

    const auto idx0 = u.nearest_index(point);
    const double h = u.spacing();
    for (int a = 0; a < u.dim(); ++a) {
        const double lo = u.origin()[static_cast<std::size_t>(a)] + h;
        const double hi = u.coordinate(a, u.extents()[static_cast<std::size_t>(a)] - 2);
        const double x = u.coordinate(a, idx0[static_cast<std::size_t>(a)]);
        if (x - 2.0 * r < lo || x + 2.0 * r > hi)
            throw BoundaryViolation("lemma31 ball B(2r) leaves the interior");
    }

    const JetRemainder rem(u, idx0);
    const auto x0 = u.point(idx0);
    const int n = u.dim();

    EstimateReport report;
    for (int level = 0; level < 3; ++level) {
        const double rl = r / (1 << level);
        double mean = 0.0;
        std::int64_t count = 0;
        for_each_ball_point(u, x0, 2.0 * rl, [&](std::span<const int> idx) {
            mean += std::fabs(rem(idx));
            ++count;
        });
        if (count == 0) throw InvalidSpec("lemma31 level ball holds no lattice points");
        mean /= count;
        const double denom = std::pow(rl, -alpha) * mean + std::pow(rl, 2.0 - alpha);

        std::vector<std::vector<int>> pts;
        for_each_ball_point(u, x0, rl, [&](std::span<const int> idx) {
            pts.emplace_back(idx.begin(), idx.end());
        });
        const int target = std::max(
            2, static_cast<int>(std::floor(std::sqrt(2.0 * pair_budget))));
        if (static_cast<int>(pts.size()) > target) {
            Rng rng = Rng(seed).split(0x6c656d + static_cast<std::uint64_t>(level));
            for (int i = 0; i < target; ++i) {
                const auto j = rng.uniform_int(i, static_cast<std::int64_t>(pts.size()) - 1);
                std::swap(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
            }
            pts.resize(static_cast<std::size_t>(target));
        }

        double seminorm = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double hi_val = rem(pts[i]);
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                double dist2 = 0.0;
                for (int a = 0; a < n; ++a) {
                    const double d = h * (pts[i][static_cast<std::size_t>(a)] - pts[j][static_cast<std::size_t>(a)]);
                    dist2 += d * d;
                }
                if (dist2 == 0.0) continue;
                seminorm = std::max(seminorm, std::fabs(hi_val - rem(pts[j])) /
                                                  std::pow(std::sqrt(dist2), alpha));
            }
        }
        const double constant = denom > 0.0 ? seminorm / denom : 0.0;
        if (level == 0) {
            report.lhs = seminorm;
            report.rhs_functional = denom;
            report.measured_constant = constant;
        }
        report.refinement_trend.push_back(constant);
    }
    return report;
}

} // namespace kh
