#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gcklab/report.hpp"
#include "gcklab/scenarios.hpp"
#include "gcklab/slant.hpp"
#include "gcklab/warped.hpp"

namespace gck {

/// Slant value of an immersion at an arbitrary chart point; the callback
/// handed to the characterization residual for its theta derivatives.
inline double theta_at(const Immersion& imm, const AmbientSpace& amb,
                       const VectorXd& u) {
    PointGeometry pg = point_geometry(imm, amb, u);
    return slant_function(pg).theta;
}

/// All per-point residual suites for one chart point. Improper points get
/// their csc/cot-weighted residuals skipped, never silently zeroed.
inline PointResult evaluate_point(const Scenario& sc, const VectorXd& u) {
    PointResult pr;
    pr.u = u;
    const Tolerances& tol = sc.tol;

    PointGeometry pg = point_geometry(sc.immersion, sc.ambient, u, tol.rank);
    pr.residuals["frame-orthonormality"] = pg.tangent_normal_defect();
    pr.residuals["h-symmetry"] = pg.h_symmetry_defect();
    pr.residuals["gauss-weingarten"] = gauss_weingarten_check(pg);
    pr.residuals["schwarz"] = pg.jet.schwarz_defect();

    SlantAnalysis sa = slant_function(pg, tol.uniformity);
    pr.residuals["slant-uniformity"] = sa.uniformity_defect;
    pr.residuals["holomorphic-purity"] = sa.holomorphic_defect;
    for (const auto& [k, v] : slant_identity_residuals(pg, sa))
        pr.residuals["slant:" + k] = v;
    if (sc.expected_cos2)
        pr.residuals["slant-oracle"] = std::abs(sa.cos2 - sc.expected_cos2(u));

    WarpedStructure ws = extract_warped_structure(pg, tol.duality);
    pr.residuals["warped-block"] = ws.block_defect;
    pr.residuals["warped-fiber-shape"] = ws.fiber_shape_defect;
    pr.residuals["warped-fiber-gradient"] = ws.fiber_gradient_defect;

    VectorXd lee = sc.ambient.lee_vector(pg.x);
    WarpedFrameData fd = warped_frame_data(pg, ws, lee);
    pr.residuals["mixed-connection"] = mixed_connection_residual(pg, ws);
    pr.residuals["lee-fiber-orthogonality"] = lee_fiber_orthogonality(pg, lee);
    for (const auto& [k, v] : pairing_residuals(pg, sa, fd)) pr.residuals[k] = v;
    pr.residuals["shape-pairing"] = shape_pairing_residual(pg, sa, fd);
    pr.residuals["characterization"] = characterization_residual(pg, sa, fd);
    for (const auto& [k, v] : foliation_residuals(pg, sa, fd)) pr.residuals[k] = v;

    const Immersion imm = sc.immersion;
    const AmbientSpace amb = sc.ambient;
    WarpSlantLink link = warp_slant_link_residual(pg, sa, ws, fd,
                                 [imm, amb](const VectorXd& up) {
                                     return theta_at(imm, amb, up);
                                 },
                                 tol.properness);
    if (!link.skipped) pr.residuals["warp-slant-link"] = link.max_residual;

    pr.bound = curvature_bound(pg, sa, ws, lee, tol.properness);
    pr.bound_evaluated = true;
    if (!pr.bound.skipped) {
        pr.residuals["bound-margin"] = pr.bound.margin;
        AdaptedFrame af = build_adapted_frame(pg, sa, tol.properness);
        pr.residuals["adapted-frame-gram"] = af.gram_defect;
    }
    return pr;
}

/// Declarative pass/fail layer: each check aggregates one residual key
/// over all points and compares against one named tolerance.
inline void build_checks(RunReport& r, const Tolerances& tol) {
    struct Spec {
        const char* key;
        const char* check_id;
        double bound;
        bool lower = false;
    };
    const std::vector<Spec> specs = {
        {"frame-orthonormality", "frames-orthonormal", tol.frame},
        {"h-symmetry", "h-symmetric", tol.frame},
        {"schwarz", "second-derivatives-symmetric", tol.algebraic},
        {"gauss-weingarten", "shape-operator-duality", tol.duality},
        {"slant-uniformity", "pointwise-slant-uniformity", tol.uniformity},
        {"holomorphic-purity", "base-block-holomorphic", tol.slant},
        {"slant:g(PX,PY)=cos2*g(X,Y)", "slant-P-metric", tol.slant},
        {"slant:g(FX,FY)=sin2*g(X,Y)", "slant-F-metric", tol.slant},
        {"slant:tFX=-sin2*X", "slant-tF-reconstruction", tol.slant},
        {"slant:fFX=-FPX", "slant-fF-reconstruction", tol.slant},
        {"slant-oracle", "slant-closed-form", tol.slant},
        {"warped-block", "warped-metric-structure", tol.duality},
        {"warped-fiber-gradient", "warping-base-only", tol.duality},
        {"mixed-connection", "mixed-connection-warping", tol.geometric},
        {"lee-fiber-orthogonality", "lee-orthogonal-to-fiber", tol.geometric},
        {"pair-base-F", "h-base-F-orthogonal", tol.geometric},
        {"pair-mixed-F", "h-mixed-F-pairing", tol.geometric},
        {"pair-mixed-F-Pleft", "h-mixed-F-pairing-P-left", tol.geometric},
        {"pair-mixed-FP", "h-mixed-FP-pairing", tol.geometric},
        {"pair-mixed-FP-Pleft", "h-mixed-FP-pairing-P-left", tol.geometric},
        {"pair-mixed-F-J", "h-mixed-F-pairing-J", tol.geometric},
        {"pair-mixed-F-JP", "h-mixed-F-pairing-JP", tol.geometric},
        {"pair-mixed-FP-J", "h-mixed-FP-pairing-J", tol.geometric},
        {"pair-mixed-FP-JP", "h-mixed-FP-pairing-JP", tol.geometric},
        {"pair-antisymmetry", "mixed-pairing-antisymmetry", tol.duality},
        {"shape-pairing", "shape-operator-warping-pairing", tol.geometric},
        {"characterization", "warped-characterization", tol.geometric},
        {"warp-slant-link", "warping-slant-derivative-link", tol.warped},
        {"foliation-base-geodesic", "base-leaf-geodesy", tol.warped},
        {"foliation-fiber-connection", "fiber-leaf-connection", tol.warped},
        {"foliation-fiber-bracket", "fiber-bracket-pairing", tol.warped},
        {"foliation-bracket-antisym", "fiber-bracket-antisymmetry", tol.duality},
        {"integrability-base", "base-integrability", tol.warped},
        {"integrability-fiber", "fiber-integrability", tol.warped},
        {"adapted-frame-gram", "adapted-frame-orthonormal", tol.duality},
        {"bound-margin", "inequality-margin", tol.margin, true},
    };
    auto agg = r.aggregates();
    for (const Spec& s : specs) {
        auto it = agg.find(s.key);
        if (it == agg.end()) continue;  // residual not applicable (e.g. improper)
        CheckResult c;
        c.id = s.check_id;
        c.bound = s.bound;
        c.lower_bound = s.lower;
        c.value = s.lower ? it->second[0] : it->second[1];  // min margin / max residual
        c.pass = s.lower ? (c.value >= c.bound) : (c.value < c.bound);
        r.checks.push_back(std::move(c));
    }
}

struct ConventionOverride {
    double sign;
    double scale;
};

inline void push_structural_failure(RunReport& r, const std::string& id, double bound) {
    for (const CheckResult& c : r.checks)
        if (c.id == id) return;
    r.checks.push_back({id, std::numeric_limits<double>::infinity(), bound, false, false});
}

/// Full verification run: calibration (or explicit convention), ambient
/// structure checks, then every per-point suite.
inline RunReport run_verify(Scenario sc,
                            std::optional<ConventionOverride> convention = {}) {
    RunReport r;
    r.scenario_id = sc.id;
    r.seed = sc.sample.seed;

    if (convention) sc.ambient.set_convention(convention->sign, convention->scale);
    else calibrate_scenario(sc);
    r.calibration = sc.ambient.calibration();

    // ambient-level checks at seeded points
    auto apts = sample_ambient_points(sc.ambient.dim(), 20, sc.sample.seed + 101u);
    double structure = 0.0, two_cal = 0.0, two_unit = 0.0;
    std::mt19937 rng(sc.sample.seed + 202u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (const VectorXd& x : apts) {
        VectorXd v(sc.ambient.dim()), w(sc.ambient.dim());
        for (int i = 0; i < sc.ambient.dim(); ++i) { v(i) = dist(rng); w(i) = dist(rng); }
        structure = std::max(structure, sc.ambient.nabla_J_residual(x, v, w));
        TwoFormCheck t = sc.ambient.fundamental_two_form_check(x);
        two_cal = std::max(two_cal, t.residual_calibrated);
        two_unit = std::max(two_unit, t.residual_unit_scale);
    }
    r.two_form = {two_cal, two_unit};
    {
        CheckResult c{"structure-identity", structure, sc.tol.geometric, false,
                      structure < sc.tol.geometric};
        r.checks.push_back(c);
        CheckResult c2{"two-form-exterior-derivative",
                       std::min(two_cal, two_unit), sc.tol.geometric, false,
                       std::min(two_cal, two_unit) < sc.tol.geometric};
        r.checks.push_back(c2);
    }

    for (const VectorXd& u : sc.points(&r.skipped_points)) {
        try {
            r.points.push_back(evaluate_point(sc, u));
        } catch (const ImproperPointError& e) {
            PointResult pr;
            pr.u = u;
            pr.skipped = true;
            pr.skip_reason = e.what();
            r.points.push_back(std::move(pr));
        } catch (const NotWarpedProductError& e) {
            // structural rejection: surface it as a hard check failure
            push_structural_failure(r, "warped-metric-structure", sc.tol.duality);
            PointResult pr;
            pr.u = u;
            pr.skipped = true;
            pr.skip_reason = e.what();
            r.points.push_back(std::move(pr));
        } catch (const NotPointwiseSlantError& e) {
            push_structural_failure(r, "pointwise-slant-uniformity", sc.tol.uniformity);
            PointResult pr;
            pr.u = u;
            pr.skipped = true;
            pr.skip_reason = e.what();
            r.points.push_back(std::move(pr));
        }
    }
    build_checks(r, sc.tol);
    return r;
}

/// Margin table over the sample (grid or random): the inequality command.
inline std::vector<MarginRow> run_inequality(Scenario sc,
                                             std::optional<ConventionOverride> convention = {}) {
    if (convention) sc.ambient.set_convention(convention->sign, convention->scale);
    else calibrate_scenario(sc);
    std::vector<MarginRow> rows;
    for (const VectorXd& u : sc.points()) {
        MarginRow row;
        row.u = u;
        PointGeometry pg = point_geometry(sc.immersion, sc.ambient, u, sc.tol.rank);
        SlantAnalysis sa = slant_function(pg, sc.tol.uniformity);
        WarpedStructure ws = extract_warped_structure(pg, sc.tol.duality);
        VectorXd lee = sc.ambient.lee_vector(pg.x);
        row.bound = curvature_bound(pg, sa, ws, lee, sc.tol.properness);
        row.skipped = row.bound.skipped;
        rows.push_back(std::move(row));
    }
    return rows;
}

struct CalibrationRecord {
    LeeCalibration fit;
    TwoFormCheck two_form;
    bool degenerate = false;
    std::string note;
};

/// Calibration command: fit the convention and report both candidate
/// two-form scalings side by side. Flat factors are reported degenerate.
inline CalibrationRecord run_calibrate(Scenario sc, unsigned seed = 11u) {
    CalibrationRecord out;
    if (sc.ambient.factor().is_constant()) {
        out.degenerate = true;
        out.note = "conformal factor is constant: no Lee data to calibrate against";
        return out;
    }
    out.fit = sc.ambient.calibrate(sample_ambient_points(sc.ambient.dim(), 24, seed));
    auto apts = sample_ambient_points(sc.ambient.dim(), 10, seed + 1);
    for (const VectorXd& x : apts) {
        TwoFormCheck t = sc.ambient.fundamental_two_form_check(x);
        out.two_form.residual_calibrated =
            std::max(out.two_form.residual_calibrated, t.residual_calibrated);
        out.two_form.residual_unit_scale =
            std::max(out.two_form.residual_unit_scale, t.residual_unit_scale);
    }
    return out;
}

}  // namespace gck
