// khessian: command-line front end for the k-convexity laboratory.
//
//   khessian <subcommand> --config <path> [--out <path>] [--format csv|json]
//
// Subcommands: eig, symm, cone, check, measure, regularity, taylor, demo.
// Exit status: 0 = all verdicts pass, 2 = a verdict failed, 1 = error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "kh/convexity.hpp"
#include "kh/jsonio.hpp"
#include "kh/measures.hpp"
#include "kh/regularity.hpp"
#include "kh/reports.hpp"

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
using namespace kh;

namespace {

// ---------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------

const json& require_field(const json& j, const std::string& key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigInvalid("missing field: " + ctx + "." + key);
    return *it;
}

template <typename T>
T field_as(const json& j, const std::string& key, const std::string& ctx) {
    try {
        return require_field(j, key, ctx).get<T>();
    } catch (const json::exception&) {
        throw ConfigInvalid("field has the wrong type: " + ctx + "." + key);
    }
}

template <typename T>
T field_or(const json& j, const std::string& key, T fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigInvalid("field has the wrong type: params." + key);
    }
}

SymMatrix parse_matrix(const json& rows, const std::string& ctx) {
    if (!rows.is_array() || rows.empty()) throw ConfigInvalid(ctx + " must be a matrix (array of rows)");
    const int n = static_cast<int>(rows.size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * n);
    for (const auto& row : rows) {
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw ConfigInvalid(ctx + " must be square");
        for (const auto& v : row) flat.push_back(v.get<double>());
    }
    try {
        return SymMatrix::from_rows(n, flat);
    } catch (const Error& e) {
        throw ConfigInvalid(ctx + ": " + e.what());
    }
}

FunctionSpec parse_function(const json& j, const std::string& ctx) {
    const std::string type = field_as<std::string>(j, "type", ctx);
    if (type == "radial-power") {
        RadialPowerSpec spec;
        spec.sigma = field_as<double>(j, "sigma", ctx);
        spec.beta = field_as<double>(j, "beta", ctx);
        return spec;
    }
    if (type == "quadratic") {
        SymMatrix q = parse_matrix(require_field(j, "Q", ctx), ctx + ".Q");
        auto b = field_as<std::vector<double>>(j, "b", ctx);
        const double c = field_as<double>(j, "c", ctx);
        if (static_cast<int>(b.size()) != q.dim())
            throw ConfigInvalid(ctx + ".b must match Q's dimension");
        return QuadraticSpec{std::move(q), std::move(b), c};
    }
    if (type == "sum") {
        SumSpec sum;
        const auto& terms = require_field(j, "terms", ctx);
        if (!terms.is_array() || terms.empty())
            throw ConfigInvalid(ctx + ".terms must be a non-empty array");
        for (std::size_t i = 0; i < terms.size(); ++i)
            sum.terms.push_back(parse_function(terms[i], ctx + ".terms[" + std::to_string(i) + "]"));
        return sum;
    }
    if (type == "grid-file") {
        return GridFileSpec{field_as<std::string>(j, "path", ctx)};
    }
    throw ConfigInvalid(ctx + ".type must be one of radial-power, quadratic, sum, grid-file");
}

struct Config {
    json root;
    std::uint64_t seed = 0;
};

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file: " + path);
    Config cfg;
    try {
        in >> cfg.root;
    } catch (const json::exception& e) {
        throw ConfigInvalid("config is not valid JSON: " + std::string(e.what()));
    }
    cfg.seed = field_or<std::uint64_t>(cfg.root, "seed", 0);
    return cfg;
}

GridFunction build_grid(const Config& cfg) {
    const auto& root = cfg.root;
    const FunctionSpec spec = parse_function(require_field(root, "function", "config"), "function");
    const auto& grid = require_field(root, "grid", "config");
    auto origin = field_as<std::vector<double>>(grid, "origin", "grid");
    const double spacing = field_as<double>(grid, "spacing", "grid");
    auto dims = field_as<std::vector<int>>(grid, "dims", "grid");
    return sample(spec, std::move(origin), spacing, std::move(dims));
}

const json& params_of(const Config& cfg) {
    static const json empty = json::object();
    auto it = cfg.root.find("params");
    return it == cfg.root.end() ? empty : *it;
}

// Optional mollification: params.mollify_eps is a number, or "auto" for
// four cells.
GridFunction maybe_mollify(const GridFunction& u, const json& params) {
    auto it = params.find("mollify_eps");
    if (it == params.end()) return u;
    double eps = 0.0;
    if (it->is_string()) {
        if (it->get<std::string>() != "auto")
            throw ConfigInvalid("params.mollify_eps must be a number or \"auto\"");
        eps = 4.0 * u.spacing();
    } else {
        eps = it->get<double>();
    }
    return mollify(u, eps);
}

// ---------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------

struct CommandResult {
    ojson report;
    std::vector<std::string> csv; // header + rows; empty = JSON only
    int exit_code = 0;
};

std::string csv_num(double v) { return format_double(v); }

std::string join_semicolon(std::span<const double> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += format_double(v[i]);
    }
    return s;
}

// ---------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------

CommandResult run_eig(const Config& cfg) {
    const auto& params = params_of(cfg);
    const auto& matrices = require_field(params, "matrices", "params");
    if (!matrices.is_array() || matrices.empty())
        throw ConfigInvalid("params.matrices must be a non-empty array");
    const double tol = field_or<double>(params, "tol", 1e-12);

    CommandResult result;
    result.report["command"] = "eig";
    ojson spectra = ojson::array();
    result.csv.push_back("matrix,index,eigenvalue");
    for (std::size_t m = 0; m < matrices.size(); ++m) {
        const SymMatrix mat = parse_matrix(matrices[m], "params.matrices[" + std::to_string(m) + "]");
        const Spectrum s = eigenvalues(mat, tol);
        ojson entry;
        entry["matrix"] = m;
        entry["eigenvalues"] = to_json(s);
        spectra.push_back(std::move(entry));
        for (int i = 0; i < s.dim(); ++i)
            result.csv.push_back(std::to_string(m) + "," + std::to_string(i) + "," + csv_num(s[i]));
    }
    result.report["spectra"] = std::move(spectra);
    return result;
}

CommandResult run_symm(const Config& cfg) {
    const auto& params = params_of(cfg);
    CommandResult result;
    result.report["command"] = "symm";
    result.csv.push_back("source,k,value");
    ojson rows = ojson::array();

    auto emit = [&](const std::string& source, int k, double value) {
        ojson row;
        row["source"] = source;
        row["k"] = k;
        row["value"] = value;
        rows.push_back(std::move(row));
        result.csv.push_back(source + "," + std::to_string(k) + "," + csv_num(value));
    };

    bool any = false;
    if (params.contains("matrices")) {
        const auto& matrices = params["matrices"];
        for (std::size_t m = 0; m < matrices.size(); ++m) {
            const SymMatrix mat =
                parse_matrix(matrices[m], "params.matrices[" + std::to_string(m) + "]");
            for (int k = 1; k <= mat.dim(); ++k)
                emit("matrix" + std::to_string(m), k, k_trace(mat, k));
            any = true;
        }
    }
    if (params.contains("lambdas")) {
        const auto& lambdas = params["lambdas"];
        for (std::size_t m = 0; m < lambdas.size(); ++m) {
            auto values = lambdas[m].get<std::vector<double>>();
            const Spectrum s{std::vector<double>(values)};
            for (int k = 1; k <= s.dim(); ++k)
                emit("lambda" + std::to_string(m), k, elementary_symmetric(s, k));
            any = true;
        }
    }
    if (!any) throw ConfigInvalid("params must contain matrices and/or lambdas");
    result.report["rows"] = std::move(rows);
    return result;
}

CommandResult run_cone(const Config& cfg) {
    const auto& params = params_of(cfg);
    const auto& lambdas = require_field(params, "lambdas", "params");
    const int k = field_as<int>(params, "k", "params");
    const std::string test = field_or<std::string>(params, "test", "gamma");
    const double tol = field_or<double>(params, "tol", kDefaultConeTol);
    const int budget = field_or<int>(params, "budget", 4096);

    CommandResult result;
    result.report["command"] = "cone";
    result.report["k"] = k;
    result.report["test"] = test;
    result.csv.push_back("lambda,k,test,member,margin");
    ojson verdicts = ojson::array();
    bool all_member = true;
    for (std::size_t m = 0; m < lambdas.size(); ++m) {
        auto values = lambdas[m].get<std::vector<double>>();
        const Spectrum s{std::vector<double>(values)};
        const ConeSpec cone{s.dim(), k};
        ConeVerdict v;
        if (test == "gamma")
            v = in_gamma_k(s, cone, tol);
        else if (test == "dual-exact")
            v = in_gamma_star_exact(s, cone, tol);
        else if (test == "dual-numeric")
            v = in_gamma_star_numeric(s, cone, budget, tol, cfg.seed + m);
        else
            throw ConfigInvalid("params.test must be gamma, dual-exact or dual-numeric");
        all_member = all_member && v.member;
        ojson entry = to_json(v);
        entry["lambda"] = values;
        verdicts.push_back(std::move(entry));
        result.csv.push_back(join_semicolon(values) + "," + std::to_string(k) + "," + test + "," +
                             (v.member ? "true" : "false") + "," + csv_num(v.margin));
    }
    result.report["verdicts"] = std::move(verdicts);
    result.exit_code = all_member ? 0 : 2;
    return result;
}

CommandResult run_check(const Config& cfg) {
    const auto& params = params_of(cfg);
    const int k = field_as<int>(params, "k", "params");
    const double tol = field_or<double>(params, "tol", kDefaultConvexityTol);
    const int budget = field_or<int>(params, "viscosity_budget", 4000);

    const GridFunction raw = build_grid(cfg);
    const GridFunction smooth = maybe_mollify(raw, params);

    WeakTestParams weak = default_weak_params(raw, cfg.seed);
    weak.tol_rel = tol;
    if (params.contains("weak_radius")) weak.radius = params["weak_radius"].get<double>();
    if (params.contains("weak_centers"))
        weak.centers = params["weak_centers"].get<std::vector<std::vector<double>>>();

    const ConvexityReport sp = spectral_test(smooth, k, tol);
    const ConvexityReport wk = weak_integral_test(raw, k, weak);
    const ConvexityReport vi = viscosity_test(smooth, k, budget, cfg.seed, tol);
    const Verdict overall = consensus({sp, wk, vi});

    CommandResult result;
    result.report["command"] = "check";
    result.report["k"] = k;
    result.report["consensus"] = verdict_name(overall);
    ojson reports = ojson::array();
    reports.push_back(to_json(sp));
    reports.push_back(to_json(wk));
    reports.push_back(to_json(vi));
    result.report["reports"] = std::move(reports);

    result.csv.push_back("method,verdict,worst_margin,tolerance,evidence_only");
    for (const auto* r : {&sp, &wk, &vi})
        result.csv.push_back(r->method + "," + verdict_name(r->verdict) + "," +
                             csv_num(r->worst_margin) + "," + csv_num(r->tolerance) + "," +
                             (r->evidence_only ? "true" : "false"));
    result.exit_code =
        (sp.verdict == Verdict::fail || wk.verdict == Verdict::fail || vi.verdict == Verdict::fail)
            ? 2
            : 0;
    return result;
}

CommandResult run_measure(const Config& cfg) {
    const auto& params = params_of(cfg);
    const int k = field_as<int>(params, "k", "params");
    const GridFunction u = build_grid(cfg);

    CommandResult result;
    result.report["command"] = "measure";
    result.report["k"] = k;
    result.csv.push_back(
        "kind,eps,r,mass,point,h_estimate,f_k_value,relative_gap,status");

    if (params.contains("center")) {
        const auto center = params["center"].get<std::vector<double>>();
        const auto radii = field_as<std::vector<double>>(params, "radii", "params");
        const auto eps_levels = field_as<std::vector<double>>(params, "eps_levels", "params");
        const MeasureEstimate est = hessian_measure_ball(u, k, center, radii, eps_levels);
        result.report["ball"] = to_json(est);
        for (std::size_t e = 0; e < est.eps_levels.size(); ++e)
            for (std::size_t r = 0; r < est.radii.size(); ++r)
                result.csv.push_back("mass," + csv_num(est.eps_levels[e]) + "," +
                                     csv_num(est.radii[r]) + "," + csv_num(est.masses[e][r]) +
                                     "," + join_semicolon(est.center) + ",,,,");
    }
    if (params.contains("probes")) {
        const auto probes = params["probes"].get<std::vector<std::vector<double>>>();
        const auto schedule = field_as<std::vector<double>>(params, "schedule", "params");
        const double eps_factor = field_or<double>(params, "eps_factor", kDefaultEpsFactor);
        const DecompositionSummary summary = decomposition_report(u, k, probes, schedule, eps_factor);
        result.report["decomposition"] = to_json(summary);
        for (const auto& p : summary.probes)
            result.csv.push_back(std::string("probe,,,,") + join_semicolon(p.point) + "," +
                                 csv_num(p.h_estimate) + "," + csv_num(p.f_k_value) + "," +
                                 csv_num(p.relative_gap) + "," + probe_status_name(p.status));
    }
    if (!params.contains("center") && !params.contains("probes"))
        throw ConfigInvalid("params must contain center (+radii+eps_levels) and/or probes (+schedule)");
    return result;
}

CommandResult run_regularity(const Config& cfg) {
    const auto& params = params_of(cfg);
    const int k = field_as<int>(params, "k", "params");
    const double inner = field_or<double>(params, "inner_margin", 0.25);
    const double outer = field_or<double>(params, "outer_margin", 0.1);
    const int field_budget = field_or<int>(params, "field_budget", 12);
    const int max_points = field_or<int>(params, "max_points", 2000);
    const int refinements = field_or<int>(params, "refinements", 1);
    const auto checks =
        field_or<std::vector<std::string>>(params, "checks", {"holder", "gradient", "bv"});

    const FunctionSpec spec =
        parse_function(require_field(cfg.root, "function", "config"), "function");
    if (refinements > 1 && std::holds_alternative<GridFileSpec>(spec))
        throw ConfigInvalid("params.refinements > 1 requires a closed-form function");
    const auto& grid = require_field(cfg.root, "grid", "config");
    const auto origin = field_as<std::vector<double>>(grid, "origin", "grid");
    const double spacing = field_as<double>(grid, "spacing", "grid");
    const auto dims = field_as<std::vector<int>>(grid, "dims", "grid");

    CommandResult result;
    result.report["command"] = "regularity";
    result.report["k"] = k;
    result.csv.push_back("check,level,lhs,rhs_functional,measured_constant");
    ojson blocks = ojson::object();

    for (const std::string& check : checks) {
        std::vector<EstimateReport> levels;
        for (int level = 0; level < refinements; ++level) {
            const int factor = 1 << level;
            std::vector<int> level_dims(dims);
            for (auto& d : level_dims) d = (d - 1) * factor + 1;
            const GridFunction u = sample(spec, origin, spacing / factor, level_dims);
            if (check == "holder") {
                levels.push_back(holder_check(u, k, inner, max_points, cfg.seed));
            } else if (check == "gradient") {
                const double q = field_as<double>(params, "q", "params");
                levels.push_back(gradient_lq_check(u, k, q, inner, outer));
            } else if (check == "bv") {
                levels.push_back(bv_check(u, inner, field_budget, cfg.seed));
            } else {
                throw ConfigInvalid("params.checks entries must be holder, gradient or bv");
            }
        }
        EstimateReport combined = levels.front();
        combined.refinement_trend.clear();
        for (const auto& l : levels) combined.refinement_trend.push_back(l.measured_constant);
        blocks[check] = to_json(combined);
        for (std::size_t l = 0; l < levels.size(); ++l)
            result.csv.push_back(check + "," + std::to_string(l) + "," + csv_num(levels[l].lhs) +
                                 "," + csv_num(levels[l].rhs_functional) + "," +
                                 csv_num(levels[l].measured_constant));
    }
    result.report["checks"] = std::move(blocks);
    return result;
}

CommandResult run_taylor(const Config& cfg) {
    const auto& params = params_of(cfg);
    const int k = field_as<int>(params, "k", "params");
    const auto point = field_as<std::vector<double>>(params, "point", "params");
    const auto radii = field_as<std::vector<double>>(params, "radii", "params");

    const GridFunction u = maybe_mollify(build_grid(cfg), params);
    const RemainderReport rep = taylor_remainder_scan(u, k, point, radii);

    CommandResult result;
    result.report["command"] = "taylor";
    result.report["k"] = k;
    result.report["scan"] = to_json(rep);
    result.csv.push_back("point,r,mean_ratio,sup_ratio");
    for (std::size_t i = 0; i < rep.radii.size(); ++i)
        result.csv.push_back(join_semicolon(rep.point) + "," + csv_num(rep.radii[i]) + "," +
                             csv_num(rep.mean_ratios[i]) + "," + csv_num(rep.sup_ratios[i]));
    result.exit_code = rep.decay_pass ? 0 : 2;
    return result;
}

// ---------------------------------------------------------------------
// demo: compact end-to-end battery over the library's main claims.
// ---------------------------------------------------------------------

CommandResult run_demo(const Config& cfg) {
    CommandResult result;
    result.report["command"] = "demo";
    result.report["seed"] = cfg.seed;
    ojson scenarios = ojson::array();
    bool all_pass = true;

    auto add = [&](const std::string& name, bool pass, ojson data) {
        ojson s;
        s["name"] = name;
        s["pass"] = pass;
        s["data"] = std::move(data);
        scenarios.push_back(std::move(s));
        all_pass = all_pass && pass;
    };

    // 1. Coupling-family spectra and dual-cone margins.
    {
        bool ok = true;
        ojson data = ojson::array();
        for (int n : {2, 3, 4, 6}) {
            const double t = 0.5 * coupling_bound(n);
            SymMatrix a = SymMatrix::identity(n);
            a.at(0, 1) = t;
            const Spectrum s = eigenvalues(a);
            double err = std::fabs(s[0] - (1.0 + t)) + std::fabs(s[n - 1] - (1.0 - t));
            for (int i = 1; i + 1 < n; ++i) err += std::fabs(s[i] - 1.0);
            const double bound = coupling_bound(n);
            std::vector<double> edge(static_cast<std::size_t>(n), 1.0);
            edge[0] = 1.0 + bound;
            edge[static_cast<std::size_t>(n - 1)] = 1.0 - bound;
            const auto verdict = in_gamma_star_exact(Spectrum{std::move(edge)}, ConeSpec{n, 2});
            ok = ok && err <= 1e-12 && std::fabs(verdict.margin) <= 1e-12;
            ojson row;
            row["n"] = n;
            row["spectrum_error"] = err;
            row["edge_margin"] = verdict.margin;
            data.push_back(std::move(row));
        }
        add("coupling-family", ok, std::move(data));
    }

    // 2. Radial thresholds.
    {
        bool ok = true;
        ojson data = ojson::array();
        for (auto [n, k] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {3, 3}, {4, 3}}) {
            const auto rep = radial_kconvexity_threshold(n, k);
            ok = ok && std::fabs(rep.swept_threshold - rep.beta_star) <= 1e-3 + 1e-12;
            ojson row;
            row["n"] = n;
            row["k"] = k;
            row["beta_star"] = rep.beta_star;
            row["swept_threshold"] = rep.swept_threshold;
            data.push_back(std::move(row));
        }
        add("radial-thresholds", ok, std::move(data));
    }

    // 3. Three-method verdicts either side of the plane threshold.
    {
        ojson data = ojson::object();
        bool ok = true;
        for (double beta : {1.5, 0.5}) {
            const double h = 2.0 / 64;
            const auto u = sample(RadialPowerSpec{1.0, beta}, {-1.0, -1.0}, h, {65, 65});
            const auto m = mollify(u, 4.0 * h);
            const auto sp = spectral_test(m, 2);
            const auto wk = weak_integral_test(u, 2, default_weak_params(u, cfg.seed));
            const auto vi = viscosity_test(m, 2, 2000, cfg.seed);
            const Verdict expected = beta >= 1.0 ? Verdict::pass : Verdict::fail;
            const Verdict got = consensus({sp, wk, vi});
            ok = ok && got == expected;
            ojson block;
            block["spectral"] = to_json(sp);
            block["weak"] = to_json(wk);
            block["viscosity"] = to_json(vi);
            block["consensus"] = verdict_name(got);
            data[beta >= 1.0 ? "above" : "below"] = std::move(block);
        }
        add("three-method-check", ok, std::move(data));
    }

    // 4. Monge-Ampere atom of the plane cone function.
    {
        const double h = 2.0 / 512;
        const auto u = sample(RadialPowerSpec{1.0, 1.0}, {-1.0, -1.0}, h, {513, 513});
        const auto est = hessian_measure_ball(u, 2, {0.0, 0.0}, {0.5}, {0.125, 0.0625});
        const double target = 3.14159265358979323846;
        const double mass = est.masses[1][0];
        const auto summary =
            decomposition_report(u, 2, {{0.0, 0.0}, {0.5, 0.0}}, {0.4, 0.2, 0.1});
        const bool ok = std::fabs(mass - target) <= 0.05 * target && summary.singular == 1 &&
                        summary.regular == 1;
        ojson data;
        data["mass"] = mass;
        data["target"] = target;
        data["decomposition"] = to_json(summary);
        add("atom-mass", ok, std::move(data));
    }

    // 5. Taylor remainder decay: quadratic flat, cubic linear in r.
    {
        const double h = 1.0 / 2048;
        const int half_cells = 1400;
        std::vector<double> cubic(2 * static_cast<std::size_t>(half_cells) + 1);
        for (int i = 0; i <= 2 * half_cells; ++i) {
            const double x = (i - half_cells) * h;
            cubic[static_cast<std::size_t>(i)] = x * x * x;
        }
        const GridFunction uc({2 * half_cells + 1}, {-half_cells * h}, h, cubic);
        const double bump = 1.0 + 1e-6;
        const auto rep = taylor_remainder_scan(uc, 1, std::vector<double>{0.0},
                                               {0.5 * bump, 0.25 * bump});
        bool ok = rep.decay_pass;
        double worst = 0.0;
        for (std::size_t i = 0; i < rep.radii.size(); ++i)
            worst = std::max(worst, std::fabs(rep.sup_ratios[i] / rep.radii[i] - 0.125));
        ok = ok && worst <= 1e-4;

        SymMatrix q(2);
        q.at(0, 0) = 1.0;
        q.at(1, 1) = 2.0;
        const auto uq = sample(QuadraticSpec{q, {0.0, 0.0}, 0.0}, {-1.0, -1.0}, 2.0 / 128,
                               {129, 129});
        const auto repq =
            taylor_remainder_scan(uq, 2, std::vector<double>{0.0, 0.0}, {0.4, 0.2, 0.1});
        for (double v : repq.sup_ratios) ok = ok && std::fabs(v) <= 1e-10;

        ojson data;
        data["cubic"] = to_json(rep);
        data["cubic_slope_error"] = worst;
        data["quadratic"] = to_json(repq);
        add("taylor-decay", ok, std::move(data));
    }

    // 6. Estimate stability under refinement and rescaling.
    {
        bool ok = true;
        ojson data = ojson::object();
        auto cone_grid = [&](int npts) {
            const double h = 2.0 / (npts - 1);
            return sample(RadialPowerSpec{1.0, 1.0}, {-1.0, -1.0}, h, {npts, npts});
        };
        const auto coarse = cone_grid(129);
        const auto fine = cone_grid(257);

        const auto h1 = holder_check(coarse, 2, 0.25, 2000, cfg.seed);
        const auto h2 = holder_check(fine, 2, 0.25, 2000, cfg.seed);
        ok = ok && std::fabs(h2.measured_constant - h1.measured_constant) <=
                       0.3 * h1.measured_constant;
        const auto g1 = gradient_lq_check(coarse, 2, 3.0, 0.3, 0.1);
        const auto g2 = gradient_lq_check(fine, 2, 3.0, 0.3, 0.1);
        ok = ok && std::fabs(g2.measured_constant - g1.measured_constant) <=
                       0.3 * g1.measured_constant;
        const auto b1 = bv_check(coarse, 0.25, 12, cfg.seed);
        const auto b2 = bv_check(fine, 0.25, 12, cfg.seed);
        ok = ok && std::fabs(b2.measured_constant - b1.measured_constant) <=
                       0.3 * b1.measured_constant;

        std::vector<double> doubled(coarse.values());
        for (auto& v : doubled) v *= 2.0;
        const GridFunction coarse2(coarse.extents(), coarse.origin(), coarse.spacing(), doubled);
        const auto h1s = holder_check(coarse2, 2, 0.25, 2000, cfg.seed);
        ok = ok && std::fabs(h1s.measured_constant - h1.measured_constant) <=
                       1e-12 * h1.measured_constant;

        data["holder"] = ojson::array({h1.measured_constant, h2.measured_constant});
        data["gradient"] = ojson::array({g1.measured_constant, g2.measured_constant});
        data["bv"] = ojson::array({b1.measured_constant, b2.measured_constant});
        data["holder_scaled_gap"] =
            std::fabs(h1s.measured_constant - h1.measured_constant);
        add("estimate-stability", ok, std::move(data));
    }

    result.report["scenarios"] = std::move(scenarios);
    result.report["all_pass"] = all_pass;
    result.exit_code = all_pass ? 0 : 2;
    return result;
}

// ---------------------------------------------------------------------

void write_output(const CommandResult& result, const std::string& out_path,
                  const std::string& format) {
    std::string payload;
    if (format == "json") {
        payload = dump_deterministic(result.report);
    } else if (format == "csv") {
        if (result.csv.empty())
            throw ConfigInvalid("this command has no CSV layout; use --format json");
        for (const auto& line : result.csv) payload += line + "\n";
    } else {
        throw ConfigInvalid("format must be csv or json");
    }
    if (out_path.empty()) {
        std::fputs(payload.c_str(), stdout);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw ConfigInvalid("cannot write output file: " + out_path);
        out << payload;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for k-convex functions"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "json";
    for (const char* name :
         {"eig", "symm", "cone", "check", "measure", "regularity", "taylor", "demo"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", out_path, "output path (default: stdout)");
        sub->add_option("--format", format, "csv or json (default json)");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        const Config cfg = load_config(config_path);
        // Config-level output settings; command-line flags win.
        std::string effective_out = out_path;
        std::string effective_format = format;
        if (auto it = cfg.root.find("output"); it != cfg.root.end()) {
            if (effective_out.empty())
                effective_out = field_or<std::string>(*it, "path", std::string{});
            if (format == "json" && it->contains("format"))
                effective_format = (*it)["format"].get<std::string>();
        }

        CommandResult result;
        if (command == "eig")
            result = run_eig(cfg);
        else if (command == "symm")
            result = run_symm(cfg);
        else if (command == "cone")
            result = run_cone(cfg);
        else if (command == "check")
            result = run_check(cfg);
        else if (command == "measure")
            result = run_measure(cfg);
        else if (command == "regularity")
            result = run_regularity(cfg);
        else if (command == "taylor")
            result = run_taylor(cfg);
        else
            result = run_demo(cfg);

        write_output(result, effective_out, effective_format);
        return result.exit_code;
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
