#include <doctest.h>

#include "gcklab/report.hpp"
#include "gcklab/verify.hpp"

using namespace gck;

namespace {

RunReport small_report() {
    Scenario sc = cone_scenario(1.0, ConformalFactor::linear_x1(0.5));
    sc.sample.count = 4;
    sc.sample.seed = 99;
    return run_verify(sc);
}

}  // namespace

TEST_CASE("report JSON serialization round-trips losslessly") {
    RunReport r = small_report();
    nlohmann::json j = report_to_json(r);
    RunReport r2 = report_from_json(nlohmann::json::parse(j.dump()));
    CHECK(report_to_json(r2).dump() == j.dump());
    CHECK(r2.scenario_id == r.scenario_id);
    CHECK(r2.points.size() == r.points.size());
    CHECK(r2.checks.size() == r.checks.size());
    for (size_t i = 0; i < r.points.size(); ++i) {
        CHECK((r2.points[i].u - r.points[i].u).norm() == 0.0);
        for (const auto& [k, v] : r.points[i].residuals)
            CHECK(r2.points[i].residuals.at(k) == v);  // exact, not approximate
    }
}

TEST_CASE("identical runs serialize byte-identically") {
    RunReport a = small_report();
    RunReport b = small_report();
    CHECK(report_to_json(a).dump(2) == report_to_json(b).dump(2));
}

TEST_CASE("margin CSV round-trips through the parser") {
    Scenario sc = twisted_scenario(ConformalFactor::product_x1y1(0.4));
    sc.sample.count = 6;
    auto rows = run_inequality(sc);
    std::string csv = margin_table_csv(rows);
    auto rows2 = margin_table_from_csv(csv);
    REQUIRE(rows2.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK((rows2[i].u - rows[i].u).norm() == 0.0);
        CHECK(rows2[i].bound.margin == rows[i].bound.margin);
        CHECK(rows2[i].bound.rhs == rows[i].bound.rhs);
        CHECK(rows2[i].skipped == rows[i].skipped);
    }
    // and the CSV itself is deterministic
    CHECK(margin_table_csv(run_inequality(sc)) == csv);
}

TEST_CASE("flat margin table has an all-zero rhs column") {
    Scenario sc = cone_scenario(1.0, ConformalFactor::flat());
    sc.sample.kind = SampleSpec::Kind::Grid;
    sc.sample.grid_dims = {2, 2, 4, 4};
    for (const MarginRow& row : run_inequality(sc)) {
        CHECK_FALSE(row.skipped);
        CHECK(row.bound.rhs == 0.0);
        CHECK(row.bound.margin >= -1e-9);
    }
}

TEST_CASE("pass/fail is derived from the tolerance table only") {
    Scenario sc = cone_scenario(1.0, ConformalFactor::linear_x1(0.5));
    sc.sample.count = 3;
    // absurdly strict geometric tolerance must flip those checks to fail
    sc.tol.geometric = 1e-30;
    RunReport r = run_verify(sc);
    CHECK_FALSE(r.all_pass());
    bool structure_failed = false;
    for (const auto& c : r.checks)
        if (c.id == "structure-identity") structure_failed = !c.pass;
    CHECK(structure_failed);
}

TEST_CASE("verify exit data: failure list names stable check ids") {
    Scenario sc = twisted_scenario(ConformalFactor::linear_x1(0.5));
    sc.sample.count = 3;
    RunReport r = run_verify(sc, ConventionOverride{+1.0, 1.0});
    CHECK_FALSE(r.all_pass());
    auto ids = r.failed_check_ids();
    CHECK(std::find(ids.begin(), ids.end(), "structure-identity") != ids.end());
    CHECK(std::find(ids.begin(), ids.end(), "warped-characterization") != ids.end());
}

TEST_CASE("calibration record is identical standalone and inside verify") {
    Scenario sc = twisted_scenario(ConformalFactor::gaussian(0.8, 0.0, 1.5));
    CalibrationRecord rec = run_calibrate(sc);
    RunReport r = run_verify(sc);
    CHECK_FALSE(rec.degenerate);
    CHECK(rec.fit.sign == r.calibration.sign);
    CHECK(std::abs(rec.fit.scale - r.calibration.scale) < 1e-12);
    Scenario flat = cone_scenario(1.0, ConformalFactor::flat());
    CHECK(run_calibrate(flat).degenerate);
}

TEST_CASE("skipped points appear in the report, never silently dropped") {
    Scenario sc = twisted_scenario(ConformalFactor::flat());
    sc.sample.kind = SampleSpec::Kind::Grid;
    sc.sample.grid_dims = {2, 2, 3, 3};
    sc.sample.lo = (VectorXd(4) << 0.4, 0.4, 0.2, 0.1).finished();
    sc.sample.hi = (VectorXd(4) << 1.4, 1.4, 1.0, 0.9).finished();
    RunReport r = run_verify(sc);
    CHECK(!r.skipped_points.empty());
    CHECK(r.points.size() + r.skipped_points.size() == 36);
    nlohmann::json j = report_to_json(r);
    CHECK(j["skipped_points"].size() == r.skipped_points.size());
}
