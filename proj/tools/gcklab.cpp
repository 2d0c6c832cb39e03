// Command-line front end: verify runs the full residual suite on a
// scenario and exits 0 iff every check passes; inequality emits the
// margin table; calibrate prints the fitted Lee convention next to both
// candidate two-form scalings.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gcklab/verify.hpp"

namespace {

struct CommonOpts {
    std::string scenario_ref;  // built-in name or config path
    bool flat = false;
    std::vector<std::string> conformal;  // family [amplitude [center width]]
    double k = 1.0;
    std::string grid;  // "NxM" or "NxMxKxL"
    unsigned seed = 1;
    int count = 0;
    std::vector<std::string> tol_overrides;  // name=value
    std::string format = "json";
    std::optional<double> lee_sign, lee_scale;
    std::string output;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("scenario", o.scenario_ref,
                    "built-in scenario (cone, twisted) or config file path")
        ->required();
    cmd->add_flag("--flat", o.flat, "use the flat (Kaehler) ambient metric");
    cmd->add_option("--conformal", o.conformal,
                    "conformal family and parameters: "
                    "constant|linear-x1|product-x1y1|gaussian-bump|linear-x2 "
                    "[amplitude [center width]]")
        ->expected(1, 4);
    cmd->add_option("--k", o.k, "cone parameter for the cone scenario");
    cmd->add_option("--grid", o.grid, "grid sampling, e.g. 10x10 (fiber block) or 3x3x4x4");
    cmd->add_option("--seed", o.seed, "random sampling seed");
    cmd->add_option("--count", o.count, "number of random sample points");
    cmd->add_option("--tol", o.tol_overrides, "tolerance override name=value (repeatable)");
    cmd->add_option("--format", o.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--lee-sign", o.lee_sign, "override Lee convention sign (+1/-1)");
    cmd->add_option("--lee-scale", o.lee_scale, "override Lee convention scale");
    cmd->add_option("-o,--output", o.output, "write the report to this file");
}

gck::ConformalFactor parse_conformal(const std::vector<std::string>& a) {
    using CF = gck::ConformalFactor;
    if (a.empty()) return CF::flat();
    const std::string& fam = a[0];
    double amp = a.size() > 1 ? std::stod(a[1]) : 1.0;
    double ctr = a.size() > 2 ? std::stod(a[2]) : 0.0;
    double wid = a.size() > 3 ? std::stod(a[3]) : 1.0;
    if (fam == "constant") return CF{CF::Family::Constant, a.size() > 1 ? amp : 0.0, 0.0, 1.0};
    if (fam == "linear-x1") return CF::linear_x1(amp);
    if (fam == "product-x1y1") return CF::product_x1y1(amp);
    if (fam == "gaussian-bump") return CF::gaussian(amp, ctr, wid);
    if (fam == "linear-x2") return CF::linear_x2(amp);
    throw gck::ConfigError("--conformal: unknown family '" + fam + "'");
}

std::vector<int> parse_grid(const std::string& s, int n) {
    std::vector<int> dims;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, 'x')) dims.push_back(std::stoi(part));
    if (static_cast<int>(dims.size()) == 2 && n == 4) {
        // NxM shorthand: grid the fiber block, hold base coordinates at
        // a 1-point pin each
        return {1, 1, dims[0], dims[1]};
    }
    if (static_cast<int>(dims.size()) != n)
        throw gck::ConfigError("--grid: expected " + std::to_string(n) + " dimensions");
    return dims;
}

gck::Scenario build_scenario(const CommonOpts& o) {
    gck::Scenario sc = [&] {
        gck::ConformalFactor cf =
            o.flat ? gck::ConformalFactor::flat() : parse_conformal(o.conformal);
        if (o.scenario_ref == "cone") return gck::cone_scenario(o.k, cf);
        if (o.scenario_ref == "twisted") return gck::twisted_scenario(cf);
        std::ifstream in(o.scenario_ref);
        if (!in) throw gck::ConfigError("cannot open scenario config: " + o.scenario_ref);
        std::stringstream buf;
        buf << in.rdbuf();
        return gck::load_scenario(buf.str());
    }();
    sc.sample.seed = o.seed;
    if (o.count > 0) sc.sample.count = o.count;
    if (!o.grid.empty()) {
        sc.sample.kind = gck::SampleSpec::Kind::Grid;
        sc.sample.grid_dims = parse_grid(o.grid, sc.immersion.n);
    }
    for (const std::string& ov : o.tol_overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw gck::ConfigError("--tol: expected name=value, got '" + ov + "'");
        sc.tol.by_name(ov.substr(0, eq)) = std::stod(ov.substr(eq + 1));
    }
    return sc;
}

std::optional<gck::ConventionOverride> convention_of(const CommonOpts& o) {
    if (!o.lee_sign && !o.lee_scale) return std::nullopt;
    return gck::ConventionOverride{o.lee_sign.value_or(-1.0), o.lee_scale.value_or(0.5)};
}

void emit(const std::string& text, const CommonOpts& o) {
    if (o.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(o.output, std::ios::binary);
    out << text;
}

std::string checks_csv(const gck::RunReport& r) {
    std::string out = "check_id,value,bound,lower_bound,pass\n";
    for (const auto& c : r.checks)
        out += c.id + "," + gck::fmt_double(c.value) + "," + gck::fmt_double(c.bound) +
               "," + (c.lower_bound ? "1" : "0") + "," + (c.pass ? "1" : "0") + "\n";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical verification lab for conformally-Kaehler submanifold geometry"};
    app.require_subcommand(1);

    CommonOpts vo, io, co;
    CLI::App* verify = app.add_subcommand("verify", "run the full residual suite");
    add_common(verify, vo);
    CLI::App* ineq = app.add_subcommand("inequality", "emit the curvature-bound margin table");
    add_common(ineq, io);
    CLI::App* cal = app.add_subcommand("calibrate", "fit and report the Lee convention");
    add_common(cal, co);

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            gck::RunReport r = gck::run_verify(build_scenario(vo), convention_of(vo));
            if (vo.format == "csv") emit(checks_csv(r), vo);
            else emit(gck::report_to_json(r).dump(2) + "\n", vo);
            if (!r.all_pass()) {
                std::cerr << "FAILED checks:";
                for (const auto& id : r.failed_check_ids()) std::cerr << " " << id;
                std::cerr << "\n";
                return 1;
            }
            return 0;
        }
        if (ineq->parsed()) {
            auto rows = gck::run_inequality(build_scenario(io), convention_of(io));
            if (io.format == "csv") emit(gck::margin_table_csv(rows), io);
            else emit(gck::margin_table_json(rows).dump(2) + "\n", io);
            double worst = 0.0;
            for (const auto& row : rows)
                if (!row.skipped) worst = std::min(worst, row.bound.margin);
            return worst >= -1e-9 ? 0 : 1;
        }
        if (cal->parsed()) {
            gck::CalibrationRecord rec = gck::run_calibrate(build_scenario(co), co.seed);
            nlohmann::json j;
            if (rec.degenerate) {
                j["degenerate"] = true;
                j["note"] = rec.note;
            } else {
                j["degenerate"] = false;
                j["sign"] = rec.fit.sign;
                j["scale"] = rec.fit.scale;
                j["residual"] = rec.fit.residual;
                j["two_form_residual_calibrated"] = rec.two_form.residual_calibrated;
                j["two_form_residual_unit_scale"] = rec.two_form.residual_unit_scale;
            }
            emit(j.dump(2) + "\n", co);
            return 0;
        }
    } catch (const gck::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
