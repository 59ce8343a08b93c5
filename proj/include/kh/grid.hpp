#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kh/linalg.hpp"

namespace kh {

/// Values of a function on a uniform box grid, row major with the last
/// index fastest. Immutable after construction.
class GridFunction {
public:
    GridFunction(std::vector<int> dims, std::vector<double> origin, double spacing,
                 std::vector<double> values);

    int dim() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& extents() const { return dims_; }
    const std::vector<double>& origin() const { return origin_; }
    double spacing() const { return spacing_; }
    std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
    const std::vector<double>& values() const { return values_; }

    double operator[](std::int64_t flat) const { return values_[static_cast<std::size_t>(flat)]; }
    double at(std::span<const int> idx) const { return values_[static_cast<std::size_t>(flat_index(idx))]; }

    std::int64_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
    std::int64_t flat_index(std::span<const int> idx) const;
    std::vector<int> unflatten(std::int64_t flat) const;

    double coordinate(int axis, int i) const {
        return origin_[static_cast<std::size_t>(axis)] + spacing_ * i;
    }
    std::vector<double> point(std::span<const int> idx) const;

    /// True when idx is at least margin cells away from every face.
    bool is_interior(std::span<const int> idx, int margin) const;

    /// Nearest lattice index to x; throws BoundaryViolation when x is
    /// farther than half a cell from the lattice along some axis, or of
    /// the wrong dimension.
    std::vector<int> nearest_index(std::span<const double> x) const;

private:
    std::vector<int> dims_;
    std::vector<double> origin_;
    double spacing_ = 0.0;
    std::vector<double> values_;
    std::vector<std::int64_t> strides_;
};

// ---------------------------------------------------------------------
// Closed-form function families
// ---------------------------------------------------------------------

/// sigma * |x|^beta with beta > 0; the value at the singular lattice
/// point (if the origin is on the lattice) is exactly 0.
struct RadialPowerSpec {
    double sigma = 1.0;
    double beta = 1.0;
};

/// c + <b, x> + x^T Q x / 2.
struct QuadraticSpec {
    SymMatrix q;
    std::vector<double> b;
    double c = 0.0;
};

struct SumSpec;
struct GridFileSpec {
    std::string path;
};

using FunctionSpec = std::variant<RadialPowerSpec, QuadraticSpec, SumSpec, GridFileSpec>;

struct SumSpec {
    std::vector<FunctionSpec> terms;
};

/// Exact closed-form value at a point. grid-file specs cannot be
/// evaluated off-lattice and raise InvalidSpec here.
double eval_spec(const FunctionSpec& spec, std::span<const double> x);

/// Pointwise-exact sampling onto a uniform grid. For grid-file specs the
/// stored grid must match the requested one bit-exactly.
GridFunction sample(const FunctionSpec& spec, std::vector<double> origin, double spacing,
                    std::vector<int> dims);

// ---------------------------------------------------------------------
// Mollification and finite differences
// ---------------------------------------------------------------------

/// Discrete convolution with the compactly supported bump kernel
/// exp(-1/(1 - |y/eps|^2)), normalized so the discrete weights sum to 1
/// exactly (constants are preserved to rounding). Requires
/// eps >= 3 * spacing; the output is the sub-grid at distance >= eps from
/// the boundary and must keep at least 5 cells per axis.
GridFunction mollify(const GridFunction& u, double eps);

/// As mollify, but only evaluates outputs in the index box
/// [lo, hi] (inclusive, in output-grid coordinates of the full mollified
/// grid). The returned grid covers exactly that box.
GridFunction mollify_region(const GridFunction& u, double eps, std::span<const int> lo,
                            std::span<const int> hi);

/// Centered first differences; idx must be >= 1 cell from every face.
std::vector<double> gradient_fd(const GridFunction& u, std::span<const int> idx);

/// Centered second differences (4-point cross stencil off-diagonal);
/// exact on quadratics up to rounding.
SymMatrix hessian_fd(const GridFunction& u, std::span<const int> idx);

// ---------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------

/// JSON document {"n":..., "dims":[...], "origin":[...], "spacing":...,
/// "values":[...]} with numbers at 17 significant digits (bit-exact
/// round-trip).
GridFunction load_grid_json(const std::string& path);
void save_grid_json(const GridFunction& u, const std::string& path);

// ---------------------------------------------------------------------
// Bump test-function profile (shared by the mollifier, the weak-form
// integrals and the variation fields): psi(q) = exp(-1/(1-q)) for q < 1,
// 0 otherwise, where q = |x-c|^2 / R^2.
// ---------------------------------------------------------------------

double bump_psi(double q);
double bump_dpsi(double q);   // d psi / dq
double bump_d2psi(double q);  // d^2 psi / dq^2

/// Smooth nonnegative compactly supported test function centered at c
/// with radius r, with exact derivatives.
class BumpFunction {
public:
    BumpFunction(std::vector<double> center, double radius);
    int dim() const { return static_cast<int>(center_.size()); }
    const std::vector<double>& center() const { return center_; }
    double radius() const { return radius_; }

    double value(std::span<const double> x) const;
    std::vector<double> gradient(std::span<const double> x) const;
    SymMatrix hessian(std::span<const double> x) const;

private:
    double q_of(std::span<const double> x) const;
    std::vector<double> center_;
    double radius_ = 0.0;
};

} // namespace kh
