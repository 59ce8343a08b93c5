#pragma once

#include <vector>

#include "kh/convexity.hpp"
#include "kh/grid.hpp"

namespace kh {

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// Ball masses of the mollified k-Hessian density across mollification
/// scales and radii: masses[e][r] integrates the k-Hessian of the
/// eps_levels[e]-mollification over the cells whose centers lie strictly
/// inside B(center, radii[r]). cauchy_diffs[e-1][r] tracks the change
/// between consecutive mollification levels.
struct MeasureEstimate {
    std::vector<double> center;
    std::vector<double> radii;
    std::vector<double> eps_levels;
    std::vector<std::vector<double>> masses;
    std::vector<std::vector<double>> cauchy_diffs;
};

MeasureEstimate hessian_measure_ball(const GridFunction& u, int k, std::vector<double> center,
                                     std::vector<double> radii, std::vector<double> eps_levels);

/// One density probe: ball-mass / ball-volume ratios along a shrinking
/// radius schedule with the mollification scale tied to the radius
/// (eps = eps_factor * r). The estimate stabilizes for regular points and
/// grows without bound where the measure carries a singular part.
struct DensityProbe {
    enum class Status { regular, singular, inconclusive };

    std::vector<double> point;
    double h_estimate = 0.0;
    double f_k_value = 0.0;
    double relative_gap = 0.0;
    bool singular_flag = false;
    Status status = Status::inconclusive;
    double stable_r = 0.0;          ///< smallest radius judged stable (0 if none)
    std::vector<double> radii;      ///< schedule actually evaluated
    std::vector<double> eps_used;   ///< mollification scale per radius
    std::vector<double> ratios;     ///< mass / (omega_n r^n) per radius
};

const char* probe_status_name(DensityProbe::Status s);

inline constexpr double kDefaultEpsFactor = 0.125; // eps = r/8

/// Raised when a probe neither stabilizes nor diverges; carries the raw
/// ratio table so callers can re-judge.
class ScheduleExhausted : public Error {
public:
    ScheduleExhausted(const std::string& what, DensityProbe data)
        : Error(what), probe(std::move(data)) {}
    DensityProbe probe;
};

DensityProbe density_probe(const GridFunction& u, int k, std::vector<double> point,
                           std::vector<double> radii_schedule,
                           double eps_factor = kDefaultEpsFactor);

/// density_probe at each point, with inconclusive probes folded in rather
/// than raised. max_relative_gap summarizes the regular points only.
struct DecompositionSummary {
    int regular = 0;
    int singular = 0;
    int inconclusive = 0;
    double max_relative_gap = 0.0;
    std::vector<DensityProbe> probes;
};

DecompositionSummary decomposition_report(const GridFunction& u, int k,
                                          const std::vector<std::vector<double>>& probe_points,
                                          std::vector<double> radii_schedule,
                                          double eps_factor = kDefaultEpsFactor);

} // namespace kh
