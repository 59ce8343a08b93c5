#include "kh/reports.hpp"

namespace kh {

using json = nlohmann::ordered_json;

json to_json(const Spectrum& s) {
    json j = json::array();
    for (int i = 0; i < s.dim(); ++i) j.push_back(s[i]);
    return j;
}

json to_json(const SymMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (int c = 0; c < m.dim(); ++c) row.push_back(m.at(i, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const ConeVerdict& v) {
    json j;
    j["member"] = v.member;
    j["margin"] = v.margin;
    j["certified_nonmember"] = v.certified_nonmember;
    if (v.witness) j["witness"] = *v.witness;
    return j;
}

json to_json(const ConvexityReport& r) {
    json j;
    j["method"] = r.method;
    j["verdict"] = verdict_name(r.verdict);
    j["worst_margin"] = r.worst_margin;
    j["tolerance"] = r.tolerance;
    if (!r.worst_index.empty()) j["worst_index"] = r.worst_index;
    if (!r.worst_label.empty()) j["worst_label"] = r.worst_label;
    j["evidence_only"] = r.evidence_only;
    j["k_only_same_verdict"] = r.k_only_same_verdict;
    if (r.method == "viscosity") j["samples_accepted"] = r.samples_accepted;
    if (r.witness) {
        json w;
        w["Q"] = to_json(r.witness->q);
        w["b"] = r.witness->b;
        w["c"] = r.witness->c;
        j["witness"] = std::move(w);
    }
    return j;
}

json to_json(const MeasureEstimate& e) {
    json j;
    j["center"] = e.center;
    j["radii"] = e.radii;
    j["eps_levels"] = e.eps_levels;
    j["masses"] = e.masses;
    j["cauchy_diffs"] = e.cauchy_diffs;
    return j;
}

json to_json(const DensityProbe& p) {
    json j;
    j["point"] = p.point;
    j["status"] = probe_status_name(p.status);
    j["singular_flag"] = p.singular_flag;
    j["h_estimate"] = p.h_estimate;
    j["f_k_value"] = p.f_k_value;
    j["relative_gap"] = p.relative_gap;
    j["stable_r"] = p.stable_r;
    j["radii"] = p.radii;
    j["eps_used"] = p.eps_used;
    j["ratios"] = p.ratios;
    return j;
}

json to_json(const DecompositionSummary& s) {
    json j;
    j["regular"] = s.regular;
    j["singular"] = s.singular;
    j["inconclusive"] = s.inconclusive;
    j["max_relative_gap"] = s.max_relative_gap;
    json probes = json::array();
    for (const auto& p : s.probes) probes.push_back(to_json(p));
    j["probes"] = std::move(probes);
    return j;
}

json to_json(const EstimateReport& r) {
    json j;
    j["lhs"] = r.lhs;
    j["rhs_functional"] = r.rhs_functional;
    j["measured_constant"] = r.measured_constant;
    j["refinement_trend"] = r.refinement_trend;
    return j;
}

json to_json(const RemainderReport& r) {
    json j;
    j["point"] = r.point;
    j["grad"] = r.grad;
    j["hess"] = to_json(r.hess);
    j["radii"] = r.radii;
    j["mean_ratios"] = r.mean_ratios;
    j["sup_ratios"] = r.sup_ratios;
    j["noise_floor"] = r.noise_floor;
    j["decay_pass"] = r.decay_pass;
    return j;
}

json to_json(const RadialThresholdReport& r) {
    json j;
    j["beta_star"] = r.beta_star;
    j["swept_threshold"] = r.swept_threshold;
    json table = json::array();
    for (const auto& row : r.table) {
        json rr;
        rr["beta"] = row.beta;
        rr["min_bracket"] = row.min_bracket;
        rr["admissible"] = row.admissible;
        table.push_back(std::move(rr));
    }
    j["table"] = std::move(table);
    return j;
}

} // namespace kh
