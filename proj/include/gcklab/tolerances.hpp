#pragma once

#include <map>
#include <string>

#include "gcklab/errors.hpp"

namespace gck {

/// Global tolerance table. The hierarchy tracks composition depth:
/// machine level for pure algebra, 1e-9 for orthonormalized frames,
/// 1e-7 for residuals composed through connection terms, 1e-6 for
/// identities that stack several of those.
struct Tolerances {
    double algebraic = 1e-12;    // exact identities (J^2=-I, reconstruction)
    double frame = 1e-9;         // frame orthonormality, h symmetry
    double duality = 1e-8;       // shape-operator duality, adapted frame Gram
    double slant = 1e-8;         // slant identities and slant-value oracles
    double geometric = 1e-7;     // structure identity, pairing and characterization residuals
    double warped = 1e-6;        // warp-slant link, foliation residuals
    double margin = -1e-9;       // curvature-bound lower bound on the margin
    double uniformity = 1e-6;    // pointwise-slant uniformity defect
    double properness = 1e-6;    // sin^2/cos^2 floor for csc/cot terms
    double rank = 1e-10;         // Gram pivot floor (relative)
    double calibration = 1e-5;   // acceptable calibration residual
    double geodesic_flag = 1e-7; // h-block threshold for geodesic flags
    double fd_cross_check = 1e-7; // jet vs finite-difference agreement

    double& by_name(const std::string& name) {
        static const std::map<std::string, double Tolerances::*> table = {
            {"algebraic", &Tolerances::algebraic},
            {"frame", &Tolerances::frame},
            {"duality", &Tolerances::duality},
            {"slant", &Tolerances::slant},
            {"geometric", &Tolerances::geometric},
            {"warped", &Tolerances::warped},
            {"margin", &Tolerances::margin},
            {"uniformity", &Tolerances::uniformity},
            {"properness", &Tolerances::properness},
            {"rank", &Tolerances::rank},
            {"calibration", &Tolerances::calibration},
            {"geodesic_flag", &Tolerances::geodesic_flag},
            {"fd_cross_check", &Tolerances::fd_cross_check},
        };
        auto it = table.find(name);
        if (it == table.end()) throw ConfigError("unknown tolerance name: " + name);
        return this->*(it->second);
    }

    std::map<std::string, double> as_map() const {
        return {{"algebraic", algebraic},   {"frame", frame},
                {"duality", duality},       {"slant", slant},
                {"geometric", geometric},   {"warped", warped},
                {"margin", margin},         {"uniformity", uniformity},
                {"properness", properness}, {"rank", rank},
                {"calibration", calibration},
                {"geodesic_flag", geodesic_flag},
                {"fd_cross_check", fd_cross_check}};
    }
};

}  // namespace gck
