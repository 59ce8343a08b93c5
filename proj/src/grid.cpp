#include "kh/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "kh/jsonio.hpp"
#include "kh/parallel.hpp"

namespace kh {

namespace {

std::int64_t product(std::span<const int> dims) {
    std::int64_t p = 1;
    for (int d : dims) p *= d;
    return p;
}

} // namespace

GridFunction::GridFunction(std::vector<int> dims, std::vector<double> origin, double spacing,
                           std::vector<double> values)
    : dims_(std::move(dims)), origin_(std::move(origin)), spacing_(spacing),
      values_(std::move(values)) {
    if (dims_.empty()) throw InvalidSpec("grid needs at least one axis");
    if (origin_.size() != dims_.size()) throw DimensionMismatch("origin/dims size mismatch");
    if (!(spacing_ > 0.0)) throw InvalidSpec("grid spacing must be positive");
    for (int d : dims_)
        if (d < 5) throw GridTooSmall("every grid extent must be >= 5");
    for (double o : origin_)
        if (!std::isfinite(o)) throw NonFiniteValue("non-finite grid origin");
    const std::int64_t total = product(dims_);
    if (total != static_cast<std::int64_t>(values_.size()))
        throw DimensionMismatch("value array does not match grid extents");
    for (double v : values_)
        if (!std::isfinite(v)) throw NonFiniteValue("non-finite grid value");

    strides_.assign(dims_.size(), 1);
    for (int a = static_cast<int>(dims_.size()) - 2; a >= 0; --a)
        strides_[static_cast<std::size_t>(a)] =
            strides_[static_cast<std::size_t>(a) + 1] * dims_[static_cast<std::size_t>(a) + 1];
}

std::int64_t GridFunction::flat_index(std::span<const int> idx) const {
    std::int64_t flat = 0;
    for (std::size_t a = 0; a < dims_.size(); ++a) flat += strides_[a] * idx[a];
    return flat;
}

std::vector<int> GridFunction::unflatten(std::int64_t flat) const {
    std::vector<int> idx(dims_.size());
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        idx[a] = static_cast<int>(flat / strides_[a]);
        flat -= strides_[a] * idx[a];
    }
    return idx;
}

std::vector<double> GridFunction::point(std::span<const int> idx) const {
    std::vector<double> x(dims_.size());
    for (std::size_t a = 0; a < dims_.size(); ++a) x[a] = coordinate(static_cast<int>(a), idx[a]);
    return x;
}

bool GridFunction::is_interior(std::span<const int> idx, int margin) const {
    for (std::size_t a = 0; a < dims_.size(); ++a)
        if (idx[a] < margin || idx[a] >= dims_[a] - margin) return false;
    return true;
}

std::vector<int> GridFunction::nearest_index(std::span<const double> x) const {
    if (x.size() != dims_.size()) throw DimensionMismatch("point dimension mismatch");
    std::vector<int> idx(dims_.size());
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        const double rel = (x[a] - origin_[a]) / spacing_;
        const double r = std::round(rel);
        if (std::fabs(rel - r) > 0.5 + 1e-9)
            throw BoundaryViolation("point is not on the lattice");
        if (r < 0 || r >= dims_[a]) throw BoundaryViolation("point outside the grid");
        idx[a] = static_cast<int>(r);
    }
    return idx;
}

// ---------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------

double eval_spec(const FunctionSpec& spec, std::span<const double> x) {
    if (const auto* radial = std::get_if<RadialPowerSpec>(&spec)) {
        if (!(radial->beta > 0.0)) throw InvalidSpec("radial power requires beta > 0");
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        if (r2 == 0.0) return 0.0;
        return radial->sigma * std::pow(std::sqrt(r2), radial->beta);
    }
    if (const auto* quad = std::get_if<QuadraticSpec>(&spec)) {
        const int n = quad->q.dim();
        if (static_cast<std::size_t>(n) != x.size() || quad->b.size() != x.size())
            throw InvalidSpec("quadratic spec dimension mismatch");
        double v = quad->c;
        for (int i = 0; i < n; ++i) {
            v += quad->b[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j)
                v += 0.5 * quad->q.at(i, j) * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
        }
        return v;
    }
    if (const auto* sum = std::get_if<SumSpec>(&spec)) {
        double v = 0.0;
        for (const auto& term : sum->terms) v += eval_spec(term, x);
        return v;
    }
    throw InvalidSpec("grid-file specs have no closed form; load them with sample()");
}

GridFunction sample(const FunctionSpec& spec, std::vector<double> origin, double spacing,
                    std::vector<int> dims) {
    if (const auto* file = std::get_if<GridFileSpec>(&spec)) {
        GridFunction g = load_grid_json(file->path);
        if (g.extents() != dims || g.origin() != origin || g.spacing() != spacing)
            throw InvalidSpec("grid file does not match the requested grid");
        return g;
    }
    const std::int64_t total = product(dims);
    GridFunction shape(dims, origin, spacing, std::vector<double>(static_cast<std::size_t>(total), 0.0));
    std::vector<double> values(static_cast<std::size_t>(total));
    std::vector<double> x(dims.size());
    for (std::int64_t flat = 0; flat < total; ++flat) {
        const auto idx = shape.unflatten(flat);
        for (std::size_t a = 0; a < dims.size(); ++a)
            x[a] = shape.coordinate(static_cast<int>(a), idx[a]);
        const double v = eval_spec(spec, x);
        if (!std::isfinite(v)) throw NonFiniteValue("function spec produced a non-finite value");
        values[static_cast<std::size_t>(flat)] = v;
    }
    return GridFunction(std::move(dims), std::move(origin), spacing, std::move(values));
}

// ---------------------------------------------------------------------
// Mollification
// ---------------------------------------------------------------------

double bump_psi(double q) { return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0; }

double bump_dpsi(double q) {
    if (q >= 1.0) return 0.0;
    const double inv = 1.0 / (1.0 - q);
    return -bump_psi(q) * inv * inv;
}

double bump_d2psi(double q) {
    if (q >= 1.0) return 0.0;
    const double inv = 1.0 / (1.0 - q);
    return bump_psi(q) * (inv * inv * inv * inv - 2.0 * inv * inv * inv);
}

namespace {

struct KernelTap {
    std::int64_t offset = 0; // flat offset into the input grid
    double weight = 0.0;
};

// Offsets nu with |nu * h| < eps, weights exp(-1/(1-(|nu|h/eps)^2)),
// normalized to unit sum. Enumeration order is fixed (row major), so the
// normalized weights and every convolution sum are reproducible.
std::vector<KernelTap> build_kernel(const GridFunction& u, double eps, int m) {
    const int n = u.dim();
    const double h = u.spacing();
    std::vector<KernelTap> taps;
    std::vector<int> nu(static_cast<std::size_t>(n), -m);
    const double inv_eps2 = 1.0 / (eps * eps);
    for (;;) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) {
            const double d = nu[static_cast<std::size_t>(a)] * h;
            r2 += d * d;
        }
        const double q = r2 * inv_eps2;
        if (q < 1.0) {
            std::int64_t off = 0;
            for (int a = 0; a < n; ++a) off += u.stride(a) * nu[static_cast<std::size_t>(a)];
            taps.push_back({off, bump_psi(q)});
        }
        int axis = n - 1;
        while (axis >= 0 && nu[static_cast<std::size_t>(axis)] == m) {
            nu[static_cast<std::size_t>(axis)] = -m;
            --axis;
        }
        if (axis < 0) break;
        ++nu[static_cast<std::size_t>(axis)];
    }
    double total = 0.0;
    for (const auto& t : taps) total += t.weight;
    for (auto& t : taps) t.weight /= total;
    return taps;
}

GridFunction mollify_impl(const GridFunction& u, double eps, const std::vector<int>* lo_req,
                          const std::vector<int>* hi_req) {
    const int n = u.dim();
    const double h = u.spacing();
    if (!(eps >= 3.0 * h)) throw EpsilonTooSmall("mollification scale must be >= 3 * spacing");

    // Largest cell count strictly inside the kernel support.
    int m = static_cast<int>(std::floor(eps / h));
    while (m * h >= eps) --m;
    while ((m + 1) * h < eps) ++m;
    const int shrink = m + 1; // distance >= eps from every face

    std::vector<int> full_dims(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        full_dims[static_cast<std::size_t>(a)] = u.extents()[static_cast<std::size_t>(a)] - 2 * shrink;
        if (full_dims[static_cast<std::size_t>(a)] < 5)
            throw GridTooSmall("mollified interior has fewer than 5 cells per axis");
    }

    std::vector<int> lo(static_cast<std::size_t>(n), 0);
    std::vector<int> hi = full_dims;
    for (auto& v : hi) --v;
    if (lo_req != nullptr) {
        lo = *lo_req;
        hi = *hi_req;
        for (int a = 0; a < n; ++a) {
            if (lo[static_cast<std::size_t>(a)] < 0 ||
                hi[static_cast<std::size_t>(a)] >= full_dims[static_cast<std::size_t>(a)] ||
                lo[static_cast<std::size_t>(a)] > hi[static_cast<std::size_t>(a)])
                throw BoundaryViolation("mollify region outside the mollified interior");
        }
    }

    std::vector<int> out_dims(static_cast<std::size_t>(n));
    std::vector<double> out_origin(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        out_dims[static_cast<std::size_t>(a)] =
            hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)] + 1;
        if (out_dims[static_cast<std::size_t>(a)] < 5)
            throw GridTooSmall("mollify region must keep at least 5 cells per axis");
        out_origin[static_cast<std::size_t>(a)] =
            u.origin()[static_cast<std::size_t>(a)] +
            h * (shrink + lo[static_cast<std::size_t>(a)]);
    }

    const auto taps = build_kernel(u, eps, m);
    const std::int64_t total = product(out_dims);
    std::vector<double> out(static_cast<std::size_t>(total));

    GridFunction shape(out_dims, out_origin, h, std::vector<double>(static_cast<std::size_t>(total), 0.0));
    const auto& uv = u.values();
    parallel_for(total, [&](std::int64_t flat) {
        const auto oidx = shape.unflatten(flat);
        std::int64_t base = 0;
        for (int a = 0; a < n; ++a)
            base += u.stride(a) * (oidx[static_cast<std::size_t>(a)] +
                                   lo[static_cast<std::size_t>(a)] + shrink);
        double acc = 0.0;
        for (const auto& t : taps) acc += t.weight * uv[static_cast<std::size_t>(base + t.offset)];
        out[static_cast<std::size_t>(flat)] = acc;
    });

    return GridFunction(std::move(out_dims), std::move(out_origin), h, std::move(out));
}

} // namespace

GridFunction mollify(const GridFunction& u, double eps) { return mollify_impl(u, eps, nullptr, nullptr); }

GridFunction mollify_region(const GridFunction& u, double eps, std::span<const int> lo,
                            std::span<const int> hi) {
    std::vector<int> lo_v(lo.begin(), lo.end());
    std::vector<int> hi_v(hi.begin(), hi.end());
    return mollify_impl(u, eps, &lo_v, &hi_v);
}

// ---------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------

std::vector<double> gradient_fd(const GridFunction& u, std::span<const int> idx) {
    const int n = u.dim();
    if (!u.is_interior(idx, 1)) throw BoundaryViolation("gradient stencil needs a 1-cell margin");
    const std::int64_t base = u.flat_index(idx);
    const double inv2h = 1.0 / (2.0 * u.spacing());
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
        g[static_cast<std::size_t>(a)] = (u[base + u.stride(a)] - u[base - u.stride(a)]) * inv2h;
    return g;
}

SymMatrix hessian_fd(const GridFunction& u, std::span<const int> idx) {
    const int n = u.dim();
    if (!u.is_interior(idx, 1)) throw BoundaryViolation("Hessian stencil needs a 1-cell margin");
    const std::int64_t base = u.flat_index(idx);
    const double inv_h2 = 1.0 / (u.spacing() * u.spacing());
    SymMatrix hess(n);
    for (int a = 0; a < n; ++a) {
        const std::int64_t sa = u.stride(a);
        hess.at(a, a) = (u[base + sa] - 2.0 * u[base] + u[base - sa]) * inv_h2;
        for (int b = a + 1; b < n; ++b) {
            const std::int64_t sb = u.stride(b);
            hess.at(a, b) =
                (u[base + sa + sb] - u[base + sa - sb] - u[base - sa + sb] + u[base - sa - sb]) *
                0.25 * inv_h2;
        }
    }
    return hess;
}

// ---------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------

GridFunction load_grid_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open grid file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec("grid file is not valid JSON: " + std::string(e.what()));
    }
    try {
        const int n = j.at("n").get<int>();
        auto dims = j.at("dims").get<std::vector<int>>();
        auto origin = j.at("origin").get<std::vector<double>>();
        const double spacing = j.at("spacing").get<double>();
        auto values = j.at("values").get<std::vector<double>>();
        if (static_cast<int>(dims.size()) != n)
            throw InvalidSpec("grid file: dims length disagrees with n");
        return GridFunction(std::move(dims), std::move(origin), spacing, std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec("grid file schema violation: " + std::string(e.what()));
    }
}

void save_grid_json(const GridFunction& u, const std::string& path) {
    nlohmann::ordered_json j;
    j["n"] = u.dim();
    j["dims"] = u.extents();
    j["origin"] = u.origin();
    j["spacing"] = u.spacing();
    j["values"] = u.values();
    std::ofstream out(path);
    if (!out) throw InvalidSpec("cannot write grid file: " + path);
    out << dump_deterministic(j);
}

// ---------------------------------------------------------------------
// Bump test functions
// ---------------------------------------------------------------------

BumpFunction::BumpFunction(std::vector<double> center, double radius)
    : center_(std::move(center)), radius_(radius) {
    if (center_.empty()) throw InvalidSpec("bump needs a center");
    if (!(radius_ > 0.0)) throw InvalidSpec("bump radius must be positive");
}

double BumpFunction::q_of(std::span<const double> x) const {
    double r2 = 0.0;
    for (std::size_t a = 0; a < center_.size(); ++a) {
        const double d = x[a] - center_[a];
        r2 += d * d;
    }
    return r2 / (radius_ * radius_);
}

double BumpFunction::value(std::span<const double> x) const { return bump_psi(q_of(x)); }

std::vector<double> BumpFunction::gradient(std::span<const double> x) const {
    const double q = q_of(x);
    std::vector<double> g(center_.size(), 0.0);
    if (q >= 1.0) return g;
    const double dpsi = bump_dpsi(q);
    const double scale = 2.0 / (radius_ * radius_);
    for (std::size_t a = 0; a < center_.size(); ++a) g[a] = dpsi * scale * (x[a] - center_[a]);
    return g;
}

SymMatrix BumpFunction::hessian(std::span<const double> x) const {
    const int n = dim();
    SymMatrix hess(n);
    const double q = q_of(x);
    if (q >= 1.0) return hess;
    const double dpsi = bump_dpsi(q);
    const double d2psi = bump_d2psi(q);
    const double r2 = radius_ * radius_;
    for (int a = 0; a < n; ++a) {
        const double da = x[static_cast<std::size_t>(a)] - center_[static_cast<std::size_t>(a)];
        for (int b = a; b < n; ++b) {
            const double db = x[static_cast<std::size_t>(b)] - center_[static_cast<std::size_t>(b)];
            double v = d2psi * 4.0 * da * db / (r2 * r2);
            if (a == b) v += dpsi * 2.0 / r2;
            hess.at(a, b) = v;
        }
    }
    return hess;
}

} // namespace kh
