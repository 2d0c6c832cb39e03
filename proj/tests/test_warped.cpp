#include <doctest.h>

#include "gcklab/scenarios.hpp"
#include "gcklab/verify.hpp"
#include "gcklab/warped.hpp"

using namespace gck;

namespace {

struct Prepared {
    PointGeometry pg;
    SlantAnalysis sa;
    WarpedStructure ws;
    VectorXd lee;
    WarpedFrameData fd;
};

Prepared prepare(Scenario& sc, const VectorXd& u) {
    calibrate_scenario(sc);
    PointGeometry pg = point_geometry(sc.immersion, sc.ambient, u);
    SlantAnalysis sa = slant_function(pg);
    WarpedStructure ws = extract_warped_structure(pg);
    VectorXd lee = sc.ambient.lee_vector(pg.x);
    WarpedFrameData fd = warped_frame_data(pg, ws, lee);
    return {pg, sa, ws, lee, fd};
}

const VectorXd kU81 = (VectorXd(4) << 0.3, -0.2, 1.1, 0.8).finished();
const VectorXd kU82 = (VectorXd(4) << 0.7, 0.9, 1.2, 0.5).finished();

}  // namespace

TEST_CASE("warping recovered from the metric equals -f/2 on the image") {
    for (auto cf : {ConformalFactor::linear_x1(0.7), ConformalFactor::product_x1y1(0.4),
                    ConformalFactor::gaussian(0.8, 0.1, 1.3)}) {
        Scenario sc = cone_scenario(1.0, cf);
        Prepared p = prepare(sc, kU81);
        double f = sc.ambient.f_value(p.pg.x);
        CHECK(std::abs(p.ws.warp_log - (-0.5 * f)) < 1e-12);
        // and its chart differential is -1/2 d(f o phi)
        VectorXd dmu_expect = -0.5 * p.pg.jet.d1.transpose() * p.pg.f_gradient;
        CHECK((p.ws.dmu - dmu_expect).norm() < 1e-14);
    }
}

TEST_CASE("warped structure accepts both genuine scenarios") {
    Scenario a = cone_scenario(1.4, ConformalFactor::linear_x1(0.5));
    Scenario b = twisted_scenario(ConformalFactor::product_x1y1(0.3));
    Prepared pa = prepare(a, kU81), pb = prepare(b, kU82);
    CHECK(pa.ws.block_defect < 1e-9);
    CHECK(pb.ws.block_defect < 1e-9);
    CHECK(pa.ws.fiber_gradient_defect < 1e-12);
    CHECK(pb.ws.fiber_gradient_defect < 1e-12);
    // warping gradient lives on the base block only
    for (int i : pa.pg.fiber_idx) CHECK(std::abs(pa.ws.grad_chart(i)) < 1e-14);
}

TEST_CASE("fiber-varying conformal factor is rejected as a warped product") {
    // f = x2 varies along the cone fiber, so the base metric block picks
    // up fiber dependence: exactly the structure the extractor must veto
    Scenario sc = cone_scenario(1.0, ConformalFactor::linear_x2(0.5));
    calibrate_scenario(sc);
    PointGeometry pg = point_geometry(sc.immersion, sc.ambient, kU81);
    CHECK_THROWS_AS(extract_warped_structure(pg), NotWarpedProductError);
}

TEST_CASE("mixed connection components follow the warping derivative") {
    for (auto sc : {cone_scenario(0.9, ConformalFactor::linear_x1(0.6)),
                    twisted_scenario(ConformalFactor::gaussian(0.5, 0.0, 1.2))}) {
        Scenario s = sc;
        Prepared p = prepare(s, s.id == "cone" ? kU81 : kU82);
        CHECK(mixed_connection_residual(p.pg, p.ws) < 1e-10);
    }
}

TEST_CASE("Lee vector is orthogonal to the fiber distribution") {
    Scenario sc = twisted_scenario(ConformalFactor::linear_x1(0.7));
    Prepared p = prepare(sc, kU82);
    CHECK(lee_fiber_orthogonality(p.pg, p.lee) < 1e-12);
}

TEST_CASE("second-fundamental-form pairing identities hold on genuine scenarios") {
    for (auto base : {cone_scenario(1.1, ConformalFactor::linear_x1(0.5)),
                      cone_scenario(1.1, ConformalFactor::product_x1y1(0.4)),
                      twisted_scenario(ConformalFactor::linear_x1(0.5)),
                      twisted_scenario(ConformalFactor::product_x1y1(0.4))}) {
        Scenario sc = base;
        Prepared p = prepare(sc, sc.id == "cone" ? kU81 : kU82);
        for (const auto& [key, value] : pairing_residuals(p.pg, p.sa, p.fd)) {
            INFO(sc.id << " " << key);
            CHECK(value < 1e-6);
        }
        CHECK(shape_pairing_residual(p.pg, p.sa, p.fd) < 1e-6);
        CHECK(characterization_residual(p.pg, p.sa, p.fd) < 1e-6);
    }
}

TEST_CASE("flat scenarios satisfy every pairing identity trivially") {
    Scenario sc = cone_scenario(1.0, ConformalFactor::flat());
    Prepared p = prepare(sc, kU81);
    for (const auto& [key, value] : pairing_residuals(p.pg, p.sa, p.fd)) CHECK(value < 1e-12);
    CHECK(shape_pairing_residual(p.pg, p.sa, p.fd) < 1e-12);
    CHECK(mixed_connection_residual(p.pg, p.ws) < 1e-12);
}

TEST_CASE("wrong Lee convention breaks the pairing identities (negative control)") {
    Scenario sc = cone_scenario(1.0, ConformalFactor::linear_x1(0.8));
    sc.ambient.set_convention(+1.0, 1.0);
    PointGeometry pg = point_geometry(sc.immersion, sc.ambient, kU81);
    SlantAnalysis sa = slant_function(pg);
    WarpedStructure ws = extract_warped_structure(pg);
    VectorXd lee = sc.ambient.lee_vector(pg.x);
    WarpedFrameData fd = warped_frame_data(pg, ws, lee);
    CHECK(pairing_residuals(pg, sa, fd).at("pair-mixed-F") > 1e-3);
    CHECK(shape_pairing_residual(pg, sa, fd) > 1e-3);
    CHECK(characterization_residual(pg, sa, fd) > 1e-3);
}

TEST_CASE("characterization residual is consistent with the A-pairings") {
    // the norm residual must equal the norm of the same vector rebuilt
    // from its frame components: two disjoint evaluation paths
    Scenario sc = cone_scenario(1.0, ConformalFactor::linear_x1(0.8));
    sc.ambient.set_convention(+1.0, 1.0);  // make it visibly nonzero
    PointGeometry pg = point_geometry(sc.immersion, sc.ambient, kU81);
    SlantAnalysis sa = slant_function(pg);
    WarpedStructure ws = extract_warped_structure(pg);
    WarpedFrameData fd = warped_frame_data(pg, ws, sc.ambient.lee_vector(pg.x));
    double direct = characterization_residual(pg, sa, fd);
    double rebuilt = 0.0;
    for (size_t a = 0; a < fd.X_chart.size(); ++a)
        for (size_t r = 0; r < fd.Z_chart.size(); ++r) {
            VectorXd av = shape_operator(pg, fd.FZ[r], fd.JX_chart[a]) -
                          shape_operator(pg, fd.FPZ[r], fd.X_chart[a]);
            VectorXd res_amb = pg.ambient_of_chart(
                av - sa.sin2() * (fd.lnf_X[a] - fd.lam_X[a]) * fd.Z_chart[r]);
            double acc = 0.0;
            for (int c = 0; c < pg.n(); ++c) {
                double comp = pg.gdot(res_amb, pg.tan_ambient.col(c));
                acc += comp * comp;
            }
            rebuilt = std::max(rebuilt, std::sqrt(acc));
        }
    CHECK(std::abs(direct - rebuilt) < 1e-9);
}

TEST_CASE("warping derivative links to the slant derivative and Lee form") {
    for (auto cf : {ConformalFactor::linear_x1(0.6), ConformalFactor::product_x1y1(0.5)}) {
        Scenario sc = twisted_scenario(cf);
        Prepared p = prepare(sc, kU82);
        Scenario copy = sc;
        WarpSlantLink r = warp_slant_link_residual(p.pg, p.sa, p.ws, p.fd, [copy](const VectorXd& u) {
            return theta_at(copy.immersion, copy.ambient, u);
        });
        CHECK_FALSE(r.skipped);
        CHECK(r.max_residual < 1e-6);
    }
}

TEST_CASE("foliation residuals vanish on genuine scenarios") {
    for (auto base : {cone_scenario(1.2, ConformalFactor::linear_x1(0.4)),
                      twisted_scenario(ConformalFactor::product_x1y1(0.3))}) {
        Scenario sc = base;
        Prepared p = prepare(sc, sc.id == "cone" ? kU81 : kU82);
        for (const auto& [key, value] : foliation_residuals(p.pg, p.sa, p.fd)) {
            INFO(sc.id << " " << key);
            CHECK(value < 1e-6);
        }
    }
}

TEST_CASE("adapted frame is orthonormal and spans tangent + normal") {
    Scenario sc = twisted_scenario(ConformalFactor::linear_x1(0.5));
    Prepared p = prepare(sc, kU82);
    AdaptedFrame af = build_adapted_frame(p.pg, p.sa);
    CHECK(af.base.size() == 2);
    CHECK(af.fiber.size() == 2);
    CHECK(af.f_normal.size() == 2);
    CHECK(af.nu.size() == 0);  // 2m - n - 2q = 6 - 4 - 2
    CHECK(af.gram_defect < 1e-8);
    // J maps base pairs onto each other
    CHECK((af.base[1] - p.pg.amb->applyJ(af.base[0])).norm() < 1e-10);
}

TEST_CASE("improper points are refused an adapted frame") {
    AmbientSpace amb(2, ConformalFactor::flat());
    Immersion im;
    im.n = 3;
    im.ambient_dim = 4;
    im.name = "cr-plane";
    im.base_indices = {0, 1};
    im.fiber_indices = {2};
    im.phi = [](const std::vector<Dual2>& u) {
        return std::vector<Dual2>{u[0], u[2], u[1], Dual2::constant(0.0, u[0].dim())};
    };
    PointGeometry pg = point_geometry(im, amb, (VectorXd(3) << 0.1, 0.2, 0.3).finished());
    SlantAnalysis sa = slant_function(pg);  // theta = pi/2
    CHECK_THROWS_AS(build_adapted_frame(pg, sa), ImproperPointError);
}

TEST_CASE("curvature bound: margins are nonnegative, rhs vanishes on genuine scenarios") {
    for (auto base : {cone_scenario(1.0, ConformalFactor::flat()),
                      cone_scenario(1.0, ConformalFactor::linear_x1(0.6)),
                      twisted_scenario(ConformalFactor::flat()),
                      twisted_scenario(ConformalFactor::product_x1y1(0.4))}) {
        Scenario sc = base;
        Prepared p = prepare(sc, sc.id == "cone" ? kU81 : kU82);
        BoundReport r = curvature_bound(p.pg, p.sa, p.ws, p.lee);
        CHECK_FALSE(r.skipped);
        CHECK(r.margin >= -1e-9);
        // the construction makes X(ln f) = alpha(X) exactly, so the
        // gradient bracket on the right-hand side cancels
        CHECK(std::abs(r.rhs) < 1e-10);
        CHECK(r.h_norm_sq >= 0.0);
    }
}

TEST_CASE("wrong convention produces a positive rhs and can violate the bound check") {
    Scenario sc = cone_scenario(1.0, ConformalFactor::linear_x1(0.8));
    sc.ambient.set_convention(+1.0, 0.5);
    PointGeometry pg = point_geometry(sc.immersion, sc.ambient, kU81);
    SlantAnalysis sa = slant_function(pg);
    WarpedStructure ws = extract_warped_structure(pg);
    BoundReport r = curvature_bound(pg, sa, ws, sc.ambient.lee_vector(pg.x));
    CHECK(r.rhs > 1e-4);  // the bracket no longer cancels
}

TEST_CASE("Kaehler specialization reproduces the general rhs when Lee is absent") {
    Scenario sc = cone_scenario(1.3, ConformalFactor::flat());
    calibrate_scenario(sc);
    std::vector<BoundReport> reports;
    sc.sample.count = 6;
    for (const VectorXd& u : sc.points()) {
        PointGeometry pg = point_geometry(sc.immersion, sc.ambient, u);
        SlantAnalysis sa = slant_function(pg);
        WarpedStructure ws = extract_warped_structure(pg);
        reports.push_back(curvature_bound(pg, sa, ws, sc.ambient.lee_vector(pg.x)));
    }
    SpecialCaseReport s = special_case_report(reports, SpecialMode::Kaehler);
    CHECK(s.max_rhs_diff < 1e-10);
    SpecialCaseReport cs = special_case_report(reports, SpecialMode::ConstantSlant);
    CHECK(cs.max_rhs_diff == 0.0);  // constant-slant mode keeps the full rhs
}

TEST_CASE("CR specialization: coefficient collapses and both normalizations print") {
    // synthetic theta -> pi/2 reports: csc^2 + cot^2 must equal 1
    std::vector<BoundReport> reports;
    BoundReport r;
    r.cos2 = 0.0;
    r.q = 1;
    r.grad_norm_sq = 0.9;
    r.lee_tangent_norm_sq = 0.2;
    r.g_star = 0.1;
    r.rhs = 4.0 * r.q * (0.9 + 0.2 - 2 * 0.1);
    reports.push_back(r);
    SpecialCaseReport s = special_case_report(reports, SpecialMode::CR);
    CHECK(s.coefficient_defect < 1e-15);
    CHECK(s.max_rhs_diff < 1e-15);
    CHECK(std::abs(s.special_rhs_last - 2.0 * s.cr_classical_rhs_last) < 1e-15);
}

TEST_CASE("specialization modes verify their hypotheses") {
    Scenario sc = twisted_scenario(ConformalFactor::linear_x1(0.5));
    Prepared p = prepare(sc, kU82);
    std::vector<BoundReport> reports = {curvature_bound(p.pg, p.sa, p.ws, p.lee)};
    CHECK_THROWS_AS(special_case_report(reports, SpecialMode::CR), ModeMismatchError);
    // pointwise (non-constant) slant across two points
    Scenario sc2 = twisted_scenario(ConformalFactor::flat());
    calibrate_scenario(sc2);
    for (auto u : {(VectorXd(4) << 0.7, 0.9, 1.2, 0.5).finished(),
                   (VectorXd(4) << 0.7, 0.9, 1.4, 0.4).finished()}) {
        PointGeometry pg = point_geometry(sc2.immersion, sc2.ambient, u);
        SlantAnalysis sa = slant_function(pg);
        WarpedStructure ws = extract_warped_structure(pg);
        reports.push_back(curvature_bound(pg, sa, ws, sc2.ambient.lee_vector(pg.x)));
    }
    CHECK_THROWS_AS(special_case_report(reports, SpecialMode::ConstantSlant),
                    ModeMismatchError);
}

TEST_CASE("equality diagnostics expose the h-block decomposition") {
    Scenario sc = cone_scenario(1.0, ConformalFactor::flat());
    Prepared p = prepare(sc, kU81);
    BoundReport r = curvature_bound(p.pg, p.sa, p.ws, p.lee);
    // base block is affine, so h(D, D) = 0; the cone fiber is not
    CHECK(r.h_base_norm_sq < 1e-14);
    CHECK(r.h_fiber_norm_sq > 1e-4);
    double sum = r.h_base_norm_sq + r.h_fiber_norm_sq + 2.0 * 0.0;  // mixed tracked separately
    CHECK(r.h_norm_sq >= sum - 1e-10);
}
