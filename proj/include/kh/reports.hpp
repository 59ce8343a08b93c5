#pragma once

#include <json.hpp>

#include "kh/cones.hpp"
#include "kh/convexity.hpp"
#include "kh/hessian_ops.hpp"
#include "kh/measures.hpp"
#include "kh/regularity.hpp"

namespace kh {

/// JSON record emission for every report type the library produces.
/// Layouts are documented by the schemas shipped under docs/schemas/.

nlohmann::ordered_json to_json(const Spectrum& s);
nlohmann::ordered_json to_json(const SymMatrix& m);
nlohmann::ordered_json to_json(const ConeVerdict& v);
nlohmann::ordered_json to_json(const ConvexityReport& r);
nlohmann::ordered_json to_json(const MeasureEstimate& e);
nlohmann::ordered_json to_json(const DensityProbe& p);
nlohmann::ordered_json to_json(const DecompositionSummary& s);
nlohmann::ordered_json to_json(const EstimateReport& r);
nlohmann::ordered_json to_json(const RemainderReport& r);
nlohmann::ordered_json to_json(const RadialThresholdReport& r);

} // namespace kh
