#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcklab/ambient.hpp"
#include "gcklab/warped.hpp"

namespace gck {

inline constexpr const char* kToolVersion = "1.0.0";

/// Fixed-format double rendering: %.17g round-trips every finite double,
/// so serialized reports are both lossless and byte-stable.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline nlohmann::json json_double(double v) { return v; }

inline nlohmann::json json_vector(const VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline VectorXd vector_from_json(const nlohmann::json& a) {
    VectorXd v(a.size());
    for (int i = 0; i < static_cast<int>(a.size()); ++i) v(i) = a[i].get<double>();
    return v;
}

struct PointResult {
    VectorXd u;
    std::map<std::string, double> residuals;
    BoundReport bound;
    bool bound_evaluated = false;
    bool skipped = false;
    std::string skip_reason;
};

struct CheckResult {
    std::string id;      // stable check identifier
    double value = 0.0;  // aggregated residual (or min margin)
    double bound = 0.0;  // tolerance it is compared against
    bool lower_bound = false;  // pass iff value >= bound (margins)
    bool pass = false;
};

struct RunReport {
    std::string scenario_id;
    std::string tool_version = kToolVersion;
    unsigned seed = 0;
    LeeCalibration calibration;
    TwoFormCheck two_form;
    std::vector<PointResult> points;
    std::vector<VectorXd> skipped_points;  // rejected at sampling time
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const CheckResult& c : checks)
            if (!c.pass) return false;
        return true;
    }

    std::vector<std::string> failed_check_ids() const {
        std::vector<std::string> out;
        for (const CheckResult& c : checks)
            if (!c.pass) out.push_back(c.id);
        return out;
    }

    /// min / max / mean per residual key across non-skipped points.
    std::map<std::string, std::array<double, 3>> aggregates() const {
        std::map<std::string, std::array<double, 3>> agg;
        std::map<std::string, int> counts;
        for (const PointResult& p : points) {
            if (p.skipped) continue;
            for (const auto& [k, v] : p.residuals) {
                auto it = agg.find(k);
                if (it == agg.end()) {
                    agg[k] = {v, v, v};
                    counts[k] = 1;
                } else {
                    it->second[0] = std::min(it->second[0], v);
                    it->second[1] = std::max(it->second[1], v);
                    it->second[2] += v;
                    ++counts[k];
                }
            }
        }
        for (auto& [k, a] : agg) a[2] /= counts[k];
        return agg;
    }
};

inline nlohmann::json bound_to_json(const BoundReport& r) {
    return {{"h_norm_sq", r.h_norm_sq},
            {"theta", r.theta},
            {"cos2", r.cos2},
            {"q", r.q},
            {"grad_norm_sq", r.grad_norm_sq},
            {"lee_tangent_norm_sq", r.lee_tangent_norm_sq},
            {"g_star", r.g_star},
            {"rhs", r.rhs},
            {"margin", r.margin},
            {"h_base_norm_sq", r.h_base_norm_sq},
            {"h_fiber_norm_sq", r.h_fiber_norm_sq},
            {"h_mixed_nu_norm_sq", r.h_mixed_nu_norm_sq},
            {"skipped", r.skipped}};
}

inline BoundReport bound_from_json(const nlohmann::json& j) {
    BoundReport r;
    r.h_norm_sq = j.at("h_norm_sq");
    r.theta = j.at("theta");
    r.cos2 = j.at("cos2");
    r.q = j.at("q");
    r.grad_norm_sq = j.at("grad_norm_sq");
    r.lee_tangent_norm_sq = j.at("lee_tangent_norm_sq");
    r.g_star = j.at("g_star");
    r.rhs = j.at("rhs");
    r.margin = j.at("margin");
    r.h_base_norm_sq = j.at("h_base_norm_sq");
    r.h_fiber_norm_sq = j.at("h_fiber_norm_sq");
    r.h_mixed_nu_norm_sq = j.at("h_mixed_nu_norm_sq");
    r.skipped = j.at("skipped");
    return r;
}

/// nlohmann objects keep keys sorted, so dump() of this structure is
/// deterministic for identical inputs.
inline nlohmann::json report_to_json(const RunReport& r) {
    nlohmann::json j;
    j["scenario_id"] = r.scenario_id;
    j["tool_version"] = r.tool_version;
    j["seed"] = r.seed;
    j["calibration"] = {{"sign", r.calibration.sign},
                        {"scale", r.calibration.scale},
                        {"residual", r.calibration.residual},
                        {"valid", r.calibration.valid}};
    j["two_form"] = {{"residual_calibrated", r.two_form.residual_calibrated},
                     {"residual_unit_scale", r.two_form.residual_unit_scale}};
    j["points"] = nlohmann::json::array();
    for (const PointResult& p : r.points) {
        nlohmann::json pj;
        pj["u"] = json_vector(p.u);
        pj["residuals"] = p.residuals;
        pj["skipped"] = p.skipped;
        if (p.skipped) pj["skip_reason"] = p.skip_reason;
        if (p.bound_evaluated) pj["bound"] = bound_to_json(p.bound);
        j["points"].push_back(std::move(pj));
    }
    j["skipped_points"] = nlohmann::json::array();
    for (const VectorXd& u : r.skipped_points) j["skipped_points"].push_back(json_vector(u));
    j["checks"] = nlohmann::json::array();
    for (const CheckResult& c : r.checks)
        j["checks"].push_back({{"id", c.id},
                               {"value", c.value},
                               {"bound", c.bound},
                               {"lower_bound", c.lower_bound},
                               {"pass", c.pass}});
    nlohmann::json agg = nlohmann::json::object();
    for (const auto& [k, a] : r.aggregates())
        agg[k] = {{"min", a[0]}, {"max", a[1]}, {"mean", a[2]}};
    j["aggregates"] = agg;
    return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
    RunReport r;
    r.scenario_id = j.at("scenario_id");
    r.tool_version = j.at("tool_version");
    r.seed = j.at("seed");
    r.calibration.sign = j.at("calibration").at("sign");
    r.calibration.scale = j.at("calibration").at("scale");
    r.calibration.residual = j.at("calibration").at("residual");
    r.calibration.valid = j.at("calibration").at("valid");
    r.two_form.residual_calibrated = j.at("two_form").at("residual_calibrated");
    r.two_form.residual_unit_scale = j.at("two_form").at("residual_unit_scale");
    for (const auto& pj : j.at("points")) {
        PointResult p;
        p.u = vector_from_json(pj.at("u"));
        p.residuals = pj.at("residuals").get<std::map<std::string, double>>();
        p.skipped = pj.at("skipped");
        if (p.skipped) p.skip_reason = pj.value("skip_reason", "");
        if (pj.contains("bound")) {
            p.bound = bound_from_json(pj.at("bound"));
            p.bound_evaluated = true;
        }
        r.points.push_back(std::move(p));
    }
    for (const auto& sj : j.at("skipped_points"))
        r.skipped_points.push_back(vector_from_json(sj));
    for (const auto& cj : j.at("checks")) {
        CheckResult c;
        c.id = cj.at("id");
        c.value = cj.at("value");
        c.bound = cj.at("bound");
        c.lower_bound = cj.at("lower_bound");
        c.pass = cj.at("pass");
        r.checks.push_back(std::move(c));
    }
    return r;
}

/// Margin table row for the inequality command.
struct MarginRow {
    VectorXd u;
    BoundReport bound;
    bool skipped = false;
};

inline const std::vector<std::string>& margin_csv_columns() {
    static const std::vector<std::string> cols = {
        "u1", "u2", "u3", "u4", "theta", "h_norm_sq", "rhs", "margin",
        "h_base_norm_sq", "h_fiber_norm_sq", "h_mixed_nu_norm_sq", "skipped"};
    return cols;
}

inline std::string margin_table_csv(const std::vector<MarginRow>& rows) {
    std::string out;
    const auto& cols = margin_csv_columns();
    for (size_t i = 0; i < cols.size(); ++i)
        out += (i ? "," : "") + cols[i];
    out += "\n";
    for (const MarginRow& r : rows) {
        for (int i = 0; i < 4; ++i)
            out += (i ? "," : "") + fmt_double(i < r.u.size() ? r.u(i) : 0.0);
        out += "," + fmt_double(r.bound.theta);
        out += "," + fmt_double(r.bound.h_norm_sq);
        out += "," + fmt_double(r.bound.rhs);
        out += "," + fmt_double(r.bound.margin);
        out += "," + fmt_double(r.bound.h_base_norm_sq);
        out += "," + fmt_double(r.bound.h_fiber_norm_sq);
        out += "," + fmt_double(r.bound.h_mixed_nu_norm_sq);
        out += r.skipped ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

inline std::vector<MarginRow> margin_table_from_csv(const std::string& text) {
    std::vector<MarginRow> rows;
    size_t pos = text.find('\n');
    if (pos == std::string::npos) return rows;
    ++pos;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty()) continue;
        std::vector<double> vals;
        size_t p = 0;
        while (p <= line.size()) {
            size_t c = line.find(',', p);
            if (c == std::string::npos) c = line.size();
            vals.push_back(std::stod(line.substr(p, c - p)));
            p = c + 1;
        }
        MarginRow r;
        r.u = VectorXd(4);
        for (int i = 0; i < 4; ++i) r.u(i) = vals[i];
        r.bound.theta = vals[4];
        r.bound.h_norm_sq = vals[5];
        r.bound.rhs = vals[6];
        r.bound.margin = vals[7];
        r.bound.h_base_norm_sq = vals[8];
        r.bound.h_fiber_norm_sq = vals[9];
        r.bound.h_mixed_nu_norm_sq = vals[10];
        r.skipped = vals[11] != 0.0;
        rows.push_back(std::move(r));
    }
    return rows;
}

inline nlohmann::json margin_table_json(const std::vector<MarginRow>& rows) {
    nlohmann::json a = nlohmann::json::array();
    for (const MarginRow& r : rows) {
        nlohmann::json j = bound_to_json(r.bound);
        j["u"] = json_vector(r.u);
        j["skipped_point"] = r.skipped;
        a.push_back(std::move(j));
    }
    return a;
}

}  // namespace gck
