#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcklab/ambient.hpp"
#include "gcklab/submanifold.hpp"
#include "gcklab/tolerances.hpp"

namespace gck {

using nlohmann::json;

/// Planar curve s -> (x(s), y(s)) evaluable in Taylor arithmetic.
struct PlanarCurve {
    std::function<Dual2(const Dual2&)> x, y;
    std::string name;
};

inline PlanarCurve unit_circle_curve() {
    return {[](const Dual2& s) { return sin(s); },
            [](const Dual2& s) { return cos(s); },
            "circle"};
}

/// How a scenario picks chart points: seeded uniform draws in a box, or a
/// tensor grid over the same box. Points failing the admissibility filter
/// are skipped and reported, never silently dropped.
struct SampleSpec {
    enum class Kind { Random, Grid };
    Kind kind = Kind::Random;
    int count = 100;
    unsigned seed = 1;
    std::vector<int> grid_dims;
    VectorXd lo, hi;
};

struct Scenario {
    std::string id;
    Immersion immersion;
    AmbientSpace ambient;
    SampleSpec sample;
    std::function<bool(const VectorXd&)> sample_filter;  // extra sampling-time cuts
    std::function<double(const VectorXd&)> expected_cos2;  // closed-form oracle
    bool constant_slant = false;
    double expected_cos_theta = 0.0;
    Tolerances tol;
    json config;  // canonical config snapshot, serialized for reports

    bool admitted(const VectorXd& u) const {
        return immersion.admits(u) && (!sample_filter || sample_filter(u));
    }

    /// Admitted chart points per the sample spec. Grid mode enumerates the
    /// full tensor grid and diverts excluded nodes to `skipped`; random
    /// mode rejects until `count` admitted points are found.
    std::vector<VectorXd> points(std::vector<VectorXd>* skipped = nullptr) const {
        std::vector<VectorXd> out;
        const int n = immersion.n;
        if (sample.kind == SampleSpec::Kind::Grid) {
            std::vector<int> dims = sample.grid_dims;
            if (static_cast<int>(dims.size()) != n)
                throw ConfigError("sample.grid_dims: expected " + std::to_string(n) +
                                  " entries");
            std::vector<int> idx(n, 0);
            while (true) {
                VectorXd u(n);
                for (int i = 0; i < n; ++i) {
                    double t = dims[i] > 1 ? double(idx[i]) / (dims[i] - 1) : 0.5;
                    u(i) = sample.lo(i) + t * (sample.hi(i) - sample.lo(i));
                }
                if (admitted(u)) out.push_back(u);
                else if (skipped) skipped->push_back(u);
                int c = n - 1;
                while (c >= 0 && ++idx[c] == dims[c]) idx[c--] = 0;
                if (c < 0) break;
            }
            return out;
        }
        std::mt19937 rng(sample.seed);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        int attempts = 0;
        while (static_cast<int>(out.size()) < sample.count && attempts < 100 * sample.count) {
            ++attempts;
            VectorXd u(n);
            for (int i = 0; i < n; ++i)
                u(i) = sample.lo(i) + dist(rng) * (sample.hi(i) - sample.lo(i));
            if (admitted(u)) out.push_back(u);
            else if (skipped) skipped->push_back(u);
        }
        if (static_cast<int>(out.size()) < sample.count)
            throw ConfigError("sample: box rejects nearly all points for " + id);
        return out;
    }
};

inline ConformalFactor conformal_from_json(const json& j) {
    if (j.is_null()) return ConformalFactor::flat();
    if (!j.is_object()) throw ConfigError("conformal: expected an object");
    std::string fam = j.value("family", "constant");
    double a = j.value("amplitude", 1.0);
    double c = j.value("center", 0.0);
    double w = j.value("width", 1.0);
    if (fam == "constant") return ConformalFactor{ConformalFactor::Family::Constant, j.value("amplitude", 0.0), 0.0, 1.0};
    if (fam == "linear-x1") return ConformalFactor::linear_x1(a);
    if (fam == "product-x1y1") return ConformalFactor::product_x1y1(a);
    if (fam == "gaussian-bump") return ConformalFactor::gaussian(a, c, w);
    if (fam == "linear-x2") return ConformalFactor::linear_x2(a);
    throw ConfigError("conformal.family: unknown family '" + fam + "'");
}

inline json conformal_to_json(const ConformalFactor& f) {
    json j;
    j["family"] = f.name();
    j["amplitude"] = f.amplitude;
    if (f.family == ConformalFactor::Family::GaussianBump) {
        j["center"] = f.center;
        j["width"] = f.width;
    }
    return j;
}

/// Fixes the Lee convention on a scenario's ambient: least-squares
/// calibration against the structure identity when the conformal factor
/// carries signal, the reference convention (sign -1, scale 1/2) when it
/// is flat and there is nothing to fit.
inline void calibrate_scenario(Scenario& sc, unsigned seed = 11u) {
    if (sc.ambient.factor().is_constant()) {
        sc.ambient.set_convention(-1.0, 0.5);
        return;
    }
    sc.ambient.calibrate(sample_ambient_points(sc.ambient.dim(), 24, seed));
}

/// Rotational-cone family: chart (u, v, r, s), base block {u, v}, fiber
/// block {r, s}, with a unit-speed profile curve and constant slant value
/// cos(theta) = k / sqrt(1 + k^2). The fiber metric degenerates at s = 0,
/// which the chart excludes.
inline Scenario cone_scenario(double k, ConformalFactor factor = ConformalFactor::flat(),
                           PlanarCurve curve = unit_circle_curve()) {
    if (!(k > 0.0)) throw ConfigError("immersion.k: must be positive");
    // reject non-unit-speed profiles before building anything
    for (int i = 0; i <= 20; ++i) {
        double s = 0.05 + i * (1.5 - 0.05) / 20.0;
        Dual2 sv = Dual2::variable(s, 1, 0);
        double gp = curve.x(sv).g(0), hp = curve.y(sv).g(0);
        if (std::abs(gp * gp + hp * hp - 1.0) > 1e-10)
            throw ConfigError("immersion.curve: not unit speed at s=" +
                              std::to_string(s));
    }

    Scenario sc{.id = "cone", .immersion = {}, .ambient = AmbientSpace(3, factor),
                .sample = {}, .sample_filter = {}, .expected_cos2 = {},
                .constant_slant = true,
                .expected_cos_theta = k / std::sqrt(1.0 + k * k),
                .tol = {}, .config = {}};
    sc.immersion.n = 4;
    sc.immersion.ambient_dim = 6;
    sc.immersion.name = "cone-k" + std::to_string(k);
    sc.immersion.base_indices = {0, 1};
    sc.immersion.fiber_indices = {2, 3};
    sc.immersion.phi = [k, curve](const std::vector<Dual2>& u) {
        const Dual2 &uu = u[0], &vv = u[1], &r = u[2], &s = u[3];
        std::vector<Dual2> x;
        x.push_back(uu);
        x.push_back(-k * s * sin(r));
        x.push_back(curve.x(s));
        x.push_back(vv);
        x.push_back(k * s * cos(r));
        x.push_back(curve.y(s));
        return x;
    };
    sc.immersion.chart_domain = [](const VectorXd& u) {
        return std::abs(u(3)) > 1e-6;  // s = 0 collapses the r-direction
    };
    double c2 = k * k / (1.0 + k * k);
    sc.expected_cos2 = [c2](const VectorXd&) { return c2; };
    sc.sample.lo = (VectorXd(4) << -1.0, -1.0, 0.0, 0.3).finished();
    sc.sample.hi = (VectorXd(4) << 1.0, 1.0, 3.0, 1.5).finished();

    sc.config["version"] = 1;
    sc.config["immersion"] = {{"name", "cone"}, {"k", k}, {"curve", curve.name}};
    sc.config["conformal"] = conformal_to_json(factor);
    return sc;
}

/// Paraboloid-times-twisted-torus family: chart (u1, u2, u3, u4), base
/// {u1, u2}, fiber {u3, u4}, pointwise slant with
/// cos^2(theta) = (u3 u4 - 1)^2 cos^2(u3 - u4) / ((1+u3^2)(1+u4^2)).
/// The chart excludes only genuine degeneracies (u1 u2 = 0, u3 u4 = 1,
/// cos(u3 - u4) = 0); the sampling filter additionally keeps u3 - u4 in
/// (0, pi/2) so the slant stays proper on sampled points.
inline Scenario twisted_scenario(ConformalFactor factor = ConformalFactor::flat()) {
    Scenario sc{.id = "twisted", .immersion = {}, .ambient = AmbientSpace(3, factor),
                .sample = {}, .sample_filter = {}, .expected_cos2 = {},
                .constant_slant = false, .expected_cos_theta = 0.0,
                .tol = {}, .config = {}};
    sc.immersion.n = 4;
    sc.immersion.ambient_dim = 6;
    sc.immersion.name = "paraboloid-twist";
    sc.immersion.base_indices = {0, 1};
    sc.immersion.fiber_indices = {2, 3};
    sc.immersion.phi = [](const std::vector<Dual2>& u) {
        const Dual2 &u1 = u[0], &u2 = u[1], &u3 = u[2], &u4 = u[3];
        std::vector<Dual2> x;
        x.push_back(0.5 * (u1 * u1 + u2 * u2));
        x.push_back(u3 * cos(u4));
        x.push_back(u3 * sin(u4));
        x.push_back(0.5 * (u1 * u1 - u2 * u2));
        x.push_back(u4 * cos(u3));
        x.push_back(u4 * sin(u3));
        return x;
    };
    sc.immersion.chart_domain = [](const VectorXd& u) {
        return std::abs(u(0)) > 1e-6 && std::abs(u(1)) > 1e-6 &&
               std::abs(u(2) * u(3) - 1.0) > 1e-6 &&
               std::abs(std::cos(u(2) - u(3))) > 1e-6;
    };
    sc.sample_filter = [](const VectorXd& u) {
        double d = u(2) - u(3);
        return std::abs(u(0)) > 0.3 && std::abs(u(1)) > 0.3 &&
               d > 0.05 && d < M_PI / 2.0 - 0.05 &&
               std::abs(u(2) * u(3) - 1.0) > 0.05;
    };
    sc.expected_cos2 = [](const VectorXd& u) {
        double u3 = u(2), u4 = u(3);
        double c = std::cos(u3 - u4);
        double num = (u3 * u4 - 1.0) * (u3 * u4 - 1.0) * c * c;
        return num / ((1.0 + u3 * u3) * (1.0 + u4 * u4));
    };
    sc.sample.lo = (VectorXd(4) << 0.4, 0.4, 0.6, 0.1).finished();
    sc.sample.hi = (VectorXd(4) << 1.4, 1.4, 1.5, 0.9).finished();

    sc.config["version"] = 1;
    sc.config["immersion"] = {{"name", "twisted"}};
    sc.config["conformal"] = conformal_to_json(factor);
    return sc;
}

/// Builds a scenario from its JSON config. Schema (version 1):
///   immersion: {name: cone|twisted, k?: number}
///   conformal: {family, amplitude?, center?, width?}   (absent = flat)
///   sample:    {kind: random|grid, count?, seed?, grid_dims?}
///   tolerances: {<name>: number, ...}
///   id?: string
/// Violations are reported with the offending field path.
inline Scenario load_scenario(const std::string& config_text) {
    json j;
    try {
        j = json::parse(config_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    if (j.value("version", 1) != 1)
        throw ConfigError("version: only version 1 is understood");
    if (!j.contains("immersion") || !j["immersion"].is_object())
        throw ConfigError("immersion: required object missing");
    const json& im = j["immersion"];
    std::string name = im.value("name", "");
    ConformalFactor cf = conformal_from_json(j.contains("conformal") ? j["conformal"] : json());

    Scenario sc = [&] {
        if (name == "cone") {
            if (im.contains("k") && !im["k"].is_number())
                throw ConfigError("immersion.k: expected a number");
            return cone_scenario(im.value("k", 1.0), cf);
        }
        if (name == "twisted") return twisted_scenario(cf);
        throw ConfigError("immersion.name: unknown immersion '" + name + "'");
    }();

    if (j.contains("sample")) {
        const json& s = j["sample"];
        if (!s.is_object()) throw ConfigError("sample: expected an object");
        std::string kind = s.value("kind", "random");
        if (kind == "random") sc.sample.kind = SampleSpec::Kind::Random;
        else if (kind == "grid") sc.sample.kind = SampleSpec::Kind::Grid;
        else throw ConfigError("sample.kind: unknown kind '" + kind + "'");
        sc.sample.count = s.value("count", 100);
        if (sc.sample.count <= 0) throw ConfigError("sample.count: must be positive");
        sc.sample.seed = s.value("seed", 1u);
        if (s.contains("grid_dims")) {
            if (!s["grid_dims"].is_array())
                throw ConfigError("sample.grid_dims: expected an array");
            sc.sample.grid_dims = s["grid_dims"].get<std::vector<int>>();
        }
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) throw ConfigError("tolerances: expected an object");
        for (auto it = t.begin(); it != t.end(); ++it) {
            if (!it.value().is_number())
                throw ConfigError("tolerances." + it.key() + ": expected a number");
            sc.tol.by_name(it.key()) = it.value().get<double>();
        }
    }
    if (j.contains("id")) sc.id = j.value("id", sc.id);

    sc.config["version"] = 1;
    sc.config["immersion"] = im;
    if (j.contains("conformal")) sc.config["conformal"] = j["conformal"];
    else sc.config["conformal"] = conformal_to_json(ConformalFactor::flat());
    sc.config["sample"] = {{"kind", sc.sample.kind == SampleSpec::Kind::Grid ? "grid" : "random"},
                           {"count", sc.sample.count},
                           {"seed", sc.sample.seed}};
    if (!sc.sample.grid_dims.empty()) sc.config["sample"]["grid_dims"] = sc.sample.grid_dims;
    sc.config["id"] = sc.id;
    return sc;
}

/// Canonical serialized form of a scenario's construction data; identical
/// seeds produce byte-identical strings.
inline std::string scenario_config_text(const Scenario& sc) {
    return sc.config.dump(2);
}

/// Seeded random scenario: draws the immersion family, its parameters,
/// and the conformal factor from the seed. Same seed, same scenario.
inline Scenario random_scenario(unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool use_81 = unit(rng) < 0.5;
    const double k = 0.5 + 1.5 * unit(rng);
    const int fam = static_cast<int>(unit(rng) * 4.0) % 4;
    const double amp = 0.2 + 0.8 * unit(rng);
    ConformalFactor cf;
    switch (fam) {
        case 0: cf = ConformalFactor::flat(); break;
        case 1: cf = ConformalFactor::linear_x1(amp); break;
        case 2: cf = ConformalFactor::product_x1y1(amp); break;
        default: cf = ConformalFactor::gaussian(amp, 0.0, 1.5); break;
    }
    Scenario sc = use_81 ? cone_scenario(k, cf) : twisted_scenario(cf);
    sc.sample.seed = seed;
    sc.id += "-r" + std::to_string(seed);
    sc.config["id"] = sc.id;
    sc.config["sample"] = {{"kind", "random"}, {"count", sc.sample.count}, {"seed", seed}};
    return sc;
}

/// Same immersion and sampling, different conformal factor: the pairing
/// used by the slant-invariance property.
inline Scenario with_conformal(const Scenario& sc, const ConformalFactor& cf) {
    Scenario out = sc;
    out.ambient = AmbientSpace(sc.ambient.half_dim(), cf);
    out.config["conformal"] = conformal_to_json(cf);
    return out;
}

}  // namespace gck
