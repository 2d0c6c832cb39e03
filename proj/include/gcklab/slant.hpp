#pragma once

#include <map>
#include <string>

#include "gcklab/submanifold.hpp"

namespace gck {

/// Tangential / normal decomposition JX = PX + FX of a tangent vector
/// (ambient components in, ambient components out).
struct PFSplit {
    VectorXd P;  // tangential part of JX
    VectorXd F;  // normal part of JX
};

inline PFSplit pf_split(const PointGeometry& pg, const VectorXd& x_ambient) {
    VectorXd jx = pg.amb->applyJ(x_ambient);
    PFSplit out;
    out.P = pg.tangent_project(jx);
    out.F = jx - out.P;
    return out;
}

/// J xi = t xi + f xi for a normal vector xi.
struct TfSplit {
    VectorXd t;  // tangential part
    VectorXd f;  // normal part
};

inline TfSplit tf_split(const PointGeometry& pg, const VectorXd& xi) {
    VectorXd jxi = pg.amb->applyJ(xi);
    TfSplit out;
    out.t = pg.tangent_project(jxi);
    out.f = jxi - out.t;
    return out;
}

struct SlantAnalysis {
    double theta = 0.0;          // in [0, pi/2]
    double cos2 = 1.0;           // cos^2 theta
    MatrixXd P_matrix;           // full tangent endomorphism, orthonormal frame
    int F_rank = 0;              // dim F(D^theta) by singular values
    double uniformity_defect = 0.0;  // deviation of -P^2 from cos2 * I on the fiber
    double holomorphic_defect = 0.0; // max |F e| over the base frame

    double sin2() const { return 1.0 - cos2; }
};

/// Slant value of the declared fiber block: metric-weighted trace of
/// P^T P over the fiber frame, with the uniformity defect reported
/// separately so the defining identity is a check, not an assumption.
inline SlantAnalysis slant_function(const PointGeometry& pg,
                                    double uniformity_tol = 1e-6) {
    const int n = pg.n();
    const int q2 = pg.fiber_dim;
    if (q2 <= 0) throw NotPointwiseSlantError("fiber block is empty");

    SlantAnalysis out;
    out.P_matrix = MatrixXd::Zero(n, n);
    std::vector<PFSplit> splits;
    splits.reserve(n);
    for (int b = 0; b < n; ++b) {
        PFSplit s = pf_split(pg, pg.tan_ambient.col(b));
        for (int a = 0; a < n; ++a)
            out.P_matrix(a, b) = pg.gdot(s.P, pg.tan_ambient.col(a));
        splits.push_back(std::move(s));
    }

    for (int a = 0; a < pg.base_dim; ++a)
        out.holomorphic_defect =
            std::max(out.holomorphic_defect, pg.gnorm(splits[a].F));

    double trace = 0.0;
    for (int r = 0; r < q2; ++r) {
        const VectorXd& pw = splits[pg.base_dim + r].P;
        trace += pg.gdot(pw, pw);
    }
    out.cos2 = trace / q2;
    out.cos2 = std::clamp(out.cos2, 0.0, 1.0);
    out.theta = std::acos(std::sqrt(out.cos2));

    for (int r = 0; r < q2; ++r) {
        const VectorXd& pw = splits[pg.base_dim + r].P;
        out.uniformity_defect =
            std::max(out.uniformity_defect, std::abs(pg.gdot(pw, pw) - out.cos2));
        // -P^2 W = cos2 W componentwise on the fiber block
        PFSplit s2 = pf_split(pg, pw);
        VectorXd residual = s2.P + out.cos2 * pg.fiber_frame_ambient(r);
        out.uniformity_defect = std::max(out.uniformity_defect, pg.gnorm(residual));
    }

    int rank = 0;
    for (int r = 0; r < q2; ++r)
        if (pg.gnorm(splits[pg.base_dim + r].F) > 1e-9) ++rank;
    out.F_rank = rank;

    if (out.uniformity_defect > uniformity_tol)
        throw NotPointwiseSlantError(
            "fiber distribution is not pointwise slant: uniformity defect " +
            std::to_string(out.uniformity_defect));
    return out;
}

/// Residuals of the four pointwise slant identities over the fiber frame.
inline std::map<std::string, double> slant_identity_residuals(const PointGeometry& pg,
                                                              const SlantAnalysis& sa) {
    std::map<std::string, double> out{{"g(PX,PY)=cos2*g(X,Y)", 0.0},
                                      {"g(FX,FY)=sin2*g(X,Y)", 0.0},
                                      {"tFX=-sin2*X", 0.0},
                                      {"fFX=-FPX", 0.0}};
    const double sin2 = 1.0 - sa.cos2;
    for (int r = 0; r < pg.fiber_dim; ++r) {
        VectorXd xr = pg.fiber_frame_ambient(r);
        PFSplit sr = pf_split(pg, xr);
        for (int s = 0; s < pg.fiber_dim; ++s) {
            VectorXd xs = pg.fiber_frame_ambient(s);
            PFSplit ss = pf_split(pg, xs);
            double gxy = (r == s) ? 1.0 : 0.0;
            out["g(PX,PY)=cos2*g(X,Y)"] =
                std::max(out["g(PX,PY)=cos2*g(X,Y)"],
                         std::abs(pg.gdot(sr.P, ss.P) - sa.cos2 * gxy));
            out["g(FX,FY)=sin2*g(X,Y)"] =
                std::max(out["g(FX,FY)=sin2*g(X,Y)"],
                         std::abs(pg.gdot(sr.F, ss.F) - sin2 * gxy));
        }
        TfSplit tfx = tf_split(pg, sr.F);
        out["tFX=-sin2*X"] =
            std::max(out["tFX=-sin2*X"], pg.gnorm(tfx.t + sin2 * xr));
        PFSplit spx = pf_split(pg, sr.P);
        out["fFX=-FPX"] = std::max(out["fFX=-FPX"], pg.gnorm(tfx.f + spx.F));
    }
    return out;
}

struct ClassificationPoint {
    VectorXd u;
    double theta = 0.0;
    bool proper = false;                 // 0 < cos^2 theta < 1
    bool base_geodesic = false;          // h(D, D) = 0
    bool fiber_geodesic = false;         // h(Dtheta, Dtheta) = 0
    bool mixed_totally_geodesic = false; // h(D, Dtheta) = 0
    double h_base_max = 0.0;
    double h_fiber_max = 0.0;
    double h_mixed_max = 0.0;
};

inline ClassificationPoint classify_point(const PointGeometry& pg,
                                          const SlantAnalysis& sa,
                                          double geodesic_tol = 1e-7,
                                          double properness_tol = 1e-6) {
    ClassificationPoint c;
    c.u = pg.u;
    c.theta = sa.theta;
    c.proper = sa.cos2 > properness_tol && sa.cos2 < 1.0 - properness_tol &&
               pg.base_dim > 0;
    auto block_max = [&](int off_a, int len_a, int off_b, int len_b) {
        double worst = 0.0;
        for (int a = 0; a < len_a; ++a)
            for (int b = 0; b < len_b; ++b)
                worst = std::max(worst, pg.gnorm(pg.h_of(pg.tan_chart.col(off_a + a),
                                                         pg.tan_chart.col(off_b + b))));
        return worst;
    };
    c.h_base_max = block_max(0, pg.base_dim, 0, pg.base_dim);
    c.h_fiber_max = block_max(pg.base_dim, pg.fiber_dim, pg.base_dim, pg.fiber_dim);
    c.h_mixed_max = block_max(0, pg.base_dim, pg.base_dim, pg.fiber_dim);
    c.base_geodesic = c.h_base_max < geodesic_tol;
    c.fiber_geodesic = c.h_fiber_max < geodesic_tol;
    c.mixed_totally_geodesic = c.h_mixed_max < geodesic_tol;
    return c;
}

}  // namespace gck
