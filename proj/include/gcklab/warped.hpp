#pragma once

#include <map>
#include <string>
#include <vector>

#include "gcklab/slant.hpp"
#include "gcklab/submanifold.hpp"

namespace gck {

/// Warping data recovered from the induced metric at one point. warp_log
/// is ln of the warping function; its chart gradient must live entirely
/// on the base block for a genuine warped product.
struct WarpedStructure {
    double warp_log = 0.0;
    VectorXd dmu;             // chart covector of warp_log, full length n
    VectorXd grad_chart;      // raised with the base metric block, fiber comps 0
    VectorXd grad_ambient;
    double grad_norm_sq = 0.0;
    double block_defect = 0.0;        // base/fiber coupling + fiber drift of base block
    double fiber_shape_defect = 0.0;  // fiber block vs scale * reference fiber metric
    double fiber_gradient_defect = 0.0;  // |d(warp_log)| along fiber directions
};

/// Recovers the warped-product structure of the induced metric: verifies
/// block-diagonality, extracts ln(warping) from the fiber-block scale
/// against the flat reference metric, and raises its differential over
/// the base block. Throws NotWarpedProductError when the declared split
/// does not actually produce a warped metric.
inline WarpedStructure extract_warped_structure(const PointGeometry& pg,
                                                double tol = 1e-8) {
    WarpedStructure ws;
    const int n = pg.n();

    // base/fiber coupling of the induced metric
    for (int i : pg.base_idx)
        for (int j : pg.fiber_idx)
            ws.block_defect = std::max(
                ws.block_defect, std::abs(pg.induced(i, j)) /
                                     std::sqrt(pg.induced(i, i) * pg.induced(j, j)));

    // drift of the base metric block along fiber coordinates:
    // d_k G_ij = -(grad f . d_k phi) G_ij + w (d2_ki . d_j + d_i . d2_kj)
    for (int k : pg.fiber_idx)
        for (int i : pg.base_idx)
            for (int j : pg.base_idx) {
                VectorXd dki(pg.ambient_dim()), dkj(pg.ambient_dim());
                for (int c = 0; c < pg.ambient_dim(); ++c) {
                    dki(c) = pg.jet.d2[c](k, i);
                    dkj(c) = pg.jet.d2[c](k, j);
                }
                double drift =
                    -pg.f_gradient.dot(pg.jet.d1.col(k)) * pg.induced(i, j) +
                    pg.weight * (dki.dot(pg.jet.d1.col(j)) + pg.jet.d1.col(i).dot(dkj));
                ws.block_defect = std::max(
                    ws.block_defect, std::abs(drift) / (1.0 + std::abs(pg.induced(i, j))));
            }

    // fiber-block scale against the flat (conformal-weight-free) reference
    double tr = 0.0, tr0 = 0.0;
    for (int i : pg.fiber_idx) {
        tr += pg.induced(i, i);
        tr0 += pg.jet.d1.col(i).squaredNorm();
    }
    const double scale = tr / tr0;
    ws.warp_log = 0.5 * std::log(scale);
    for (int i : pg.fiber_idx)
        for (int j : pg.fiber_idx) {
            double ref = scale * pg.jet.d1.col(i).dot(pg.jet.d1.col(j));
            ws.fiber_shape_defect = std::max(
                ws.fiber_shape_defect,
                std::abs(pg.induced(i, j) - ref) / (1.0 + std::abs(pg.induced(i, j))));
        }

    // d(warp_log) = -1/2 d(f . phi) for the conformal construction
    ws.dmu = -0.5 * pg.jet.d1.transpose() * pg.f_gradient;
    for (int i : pg.fiber_idx)
        ws.fiber_gradient_defect =
            std::max(ws.fiber_gradient_defect, std::abs(ws.dmu(i)));

    if (ws.block_defect > tol)
        throw NotWarpedProductError(
            "induced metric is not warped-block structured (defect " +
            std::to_string(ws.block_defect) + ")");
    if (ws.fiber_gradient_defect > tol)
        throw NotWarpedProductError(
            "warping function varies along the fiber (defect " +
            std::to_string(ws.fiber_gradient_defect) + ")");

    // raise d(warp_log) with the base block of the induced metric
    const int p2 = static_cast<int>(pg.base_idx.size());
    MatrixXd gbb(p2, p2);
    VectorXd db(p2);
    for (int a = 0; a < p2; ++a) {
        db(a) = ws.dmu(pg.base_idx[a]);
        for (int b = 0; b < p2; ++b)
            gbb(a, b) = pg.induced(pg.base_idx[a], pg.base_idx[b]);
    }
    VectorXd vb = solve_spd(gbb, db);
    ws.grad_chart = VectorXd::Zero(n);
    for (int a = 0; a < p2; ++a) ws.grad_chart(pg.base_idx[a]) = vb(a);
    ws.grad_ambient = pg.ambient_of_chart(ws.grad_chart);
    ws.grad_norm_sq = db.dot(vb);
    return ws;
}

/// Directional derivative of warp_log along a tangent vector in chart
/// components.
inline double warp_derivative(const WarpedStructure& ws, const VectorXd& chart_x) {
    return ws.dmu.dot(chart_x);
}

/// alpha(X) under the calibrated convention, X in ambient components.
inline double lee_pairing(const PointGeometry& pg, const VectorXd& lee_vec,
                          const VectorXd& x_ambient) {
    return pg.gdot(lee_vec, x_ambient);
}

/// Max over base/fiber coordinate field pairs of
/// |tangential(nabla_X Z) - X(warp_log) Z| / |Z|.
inline double mixed_connection_residual(const PointGeometry& pg, const WarpedStructure& ws) {
    double worst = 0.0;
    for (int i : pg.base_idx)
        for (int j : pg.fiber_idx) {
            VectorXd cov = coordinate_connection(pg, i, j);
            VectorXd z = pg.jet.d1.col(j);
            VectorXd res = pg.tangent_project(cov) - ws.dmu(i) * z;
            worst = std::max(worst, pg.gnorm(res) / pg.gnorm(z));
        }
    return worst;
}

/// Max |g(lambda, Z)| over the orthonormal fiber frame: the Lee vector
/// must be orthogonal to the slant distribution.
inline double lee_fiber_orthogonality(const PointGeometry& pg, const VectorXd& lee_vec) {
    double worst = 0.0;
    for (int r = 0; r < pg.fiber_dim; ++r)
        worst = std::max(worst,
                         std::abs(pg.gdot(lee_vec, pg.fiber_frame_ambient(r))));
    return worst;
}

/// Cached per-frame-vector quantities used by the warped identities.
struct WarpedFrameData {
    // base frame (2p entries)
    std::vector<VectorXd> X_chart, X_amb, JX_chart, JX_amb;
    std::vector<double> lam_X, lam_JX, lnf_X, lnf_JX;
    // fiber frame (2q entries)
    std::vector<VectorXd> Z_chart, Z_amb, PZ_chart, PZ_amb, FZ, FPZ;
    VectorXd lee_vec;
};

inline WarpedFrameData warped_frame_data(const PointGeometry& pg,
                                         const WarpedStructure& ws,
                                         const VectorXd& lee_vec) {
    WarpedFrameData d;
    d.lee_vec = lee_vec;
    for (int a = 0; a < pg.base_dim; ++a) {
        VectorXd cx = pg.base_frame_chart(a);
        VectorXd ax = pg.base_frame_ambient(a);
        VectorXd jx = pg.amb->applyJ(ax);
        d.X_chart.push_back(cx);
        d.X_amb.push_back(ax);
        d.JX_amb.push_back(jx);
        d.JX_chart.push_back(pg.chart_of_tangent(jx));
        d.lam_X.push_back(pg.gdot(lee_vec, ax));
        d.lam_JX.push_back(pg.gdot(lee_vec, jx));
        d.lnf_X.push_back(warp_derivative(ws, cx));
        d.lnf_JX.push_back(warp_derivative(ws, d.JX_chart.back()));
    }
    for (int r = 0; r < pg.fiber_dim; ++r) {
        VectorXd cz = pg.fiber_frame_chart(r);
        VectorXd az = pg.fiber_frame_ambient(r);
        PFSplit s = pf_split(pg, az);
        d.Z_chart.push_back(cz);
        d.Z_amb.push_back(az);
        d.PZ_amb.push_back(s.P);
        d.PZ_chart.push_back(pg.chart_of_tangent(s.P));
        d.FZ.push_back(s.F);
        d.FPZ.push_back(pf_split(pg, s.P).F);
    }
    return d;
}

/// Residuals of the second-fundamental-form identities of the warped
/// product: parts (i) and (ii), their six interchanged variants, and the
/// antisymmetry consequence. Keys are stable identifiers.
inline std::map<std::string, double> pairing_residuals(const PointGeometry& pg,
                                                   const SlantAnalysis& sa,
                                                   const WarpedFrameData& d) {
    std::map<std::string, double> out{
        {"pair-base-F", 0.0},   {"pair-mixed-F", 0.0},  {"pair-mixed-F-Pleft", 0.0}, {"pair-mixed-FP", 0.0},
        {"pair-mixed-FP-Pleft", 0.0},  {"pair-mixed-F-J", 0.0},  {"pair-mixed-F-JP", 0.0}, {"pair-mixed-FP-J", 0.0},
        {"pair-mixed-FP-JP", 0.0},  {"pair-antisymmetry", 0.0}};
    const double c2 = sa.cos2;
    auto acc = [&](const std::string& key, double v) {
        out[key] = std::max(out[key], std::abs(v));
    };

    // (i): g(h(X,Y), FZ) = 0 over base pairs
    for (size_t a = 0; a < d.X_chart.size(); ++a)
        for (size_t b = 0; b < d.X_chart.size(); ++b) {
            VectorXd hxy = pg.h_of(d.X_chart[a], d.X_chart[b]);
            for (const VectorXd& fz : d.FZ) acc("pair-base-F", pg.gdot(hxy, fz));
        }

    for (size_t a = 0; a < d.X_chart.size(); ++a) {
        const double bJ = d.lam_JX[a] - d.lnf_JX[a];  // g(lam,JX) - JX(ln f)
        const double bX = d.lam_X[a] - d.lnf_X[a];    // g(lam,X) - X(ln f)
        for (size_t r = 0; r < d.Z_chart.size(); ++r)
            for (size_t s = 0; s < d.Z_chart.size(); ++s) {
                const double gZW = (r == s) ? 1.0 : 0.0;
                const double gZPW = pg.gdot(d.Z_amb[r], d.PZ_amb[s]);
                auto hpair = [&](const VectorXd& left_chart, const VectorXd& xi) {
                    return pg.gdot(pg.h_of(d.X_chart[a], left_chart), xi);
                };
                auto hpairJ = [&](const VectorXd& left_chart, const VectorXd& xi) {
                    return pg.gdot(pg.h_of(d.JX_chart[a], left_chart), xi);
                };
                acc("pair-mixed-F", hpair(d.Z_chart[r], d.FZ[s]) - (bJ * gZW + bX * gZPW));
                acc("pair-mixed-F-Pleft", hpair(d.PZ_chart[r], d.FZ[s]) - (-bJ * gZPW + c2 * bX * gZW));
                acc("pair-mixed-FP", hpair(d.Z_chart[r], d.FPZ[s]) - (-c2 * bX * gZW + bJ * gZPW));
                acc("pair-mixed-FP-Pleft", hpair(d.PZ_chart[r], d.FPZ[s]) - (c2 * bJ * gZW + c2 * bX * gZPW));
                acc("pair-mixed-F-J", hpairJ(d.Z_chart[r], d.FZ[s]) - (-bX * gZW + bJ * gZPW));
                acc("pair-mixed-F-JP", hpairJ(d.PZ_chart[r], d.FZ[s]) - (bX * gZPW + c2 * bJ * gZW));
                acc("pair-mixed-FP-J", hpairJ(d.Z_chart[r], d.FPZ[s]) - (-c2 * bJ * gZW - bX * gZPW));
                acc("pair-mixed-FP-JP", hpairJ(d.PZ_chart[r], d.FPZ[s]) - (-c2 * bX * gZW + c2 * bJ * gZPW));
                acc("pair-antisymmetry",
                    hpair(d.PZ_chart[r], d.FZ[s]) + hpair(d.Z_chart[r], d.FPZ[s]));
            }
    }
    return out;
}

/// g(A_FZ JX - A_FPZ X, W) = sin^2(theta) [X(ln f) - alpha(X)] g(Z, W).
inline double shape_pairing_residual(const PointGeometry& pg, const SlantAnalysis& sa,
                           const WarpedFrameData& d) {
    double worst = 0.0;
    for (size_t a = 0; a < d.X_chart.size(); ++a)
        for (size_t r = 0; r < d.Z_chart.size(); ++r) {
            VectorXd av = shape_operator(pg, d.FZ[r], d.JX_chart[a]) -
                          shape_operator(pg, d.FPZ[r], d.X_chart[a]);
            VectorXd av_amb = pg.ambient_of_chart(av);
            for (size_t s = 0; s < d.Z_chart.size(); ++s) {
                double lhs = pg.gdot(av_amb, d.Z_amb[s]);
                double rhs = sa.sin2() * (d.lnf_X[a] - d.lam_X[a]) * ((r == s) ? 1.0 : 0.0);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    return worst;
}

/// ||A_FZ JX - A_FPZ X - sin^2(theta) (X(mu) - alpha(X)) Z|| over frames.
inline double characterization_residual(const PointGeometry& pg,
                                            const SlantAnalysis& sa,
                                            const WarpedFrameData& d) {
    double worst = 0.0;
    for (size_t a = 0; a < d.X_chart.size(); ++a)
        for (size_t r = 0; r < d.Z_chart.size(); ++r) {
            VectorXd av = shape_operator(pg, d.FZ[r], d.JX_chart[a]) -
                          shape_operator(pg, d.FPZ[r], d.X_chart[a]);
            VectorXd res = av - sa.sin2() * (d.lnf_X[a] - d.lam_X[a]) * d.Z_chart[r];
            worst = std::max(worst, pg.gnorm(pg.ambient_of_chart(res)));
        }
    return worst;
}

struct WarpSlantLink {
    std::vector<double> residual_per_direction;  // one per base frame vector
    double max_residual = 0.0;
    bool skipped = false;  // improper point (theta at 0 or pi/2)
};

/// X(ln f) = alpha(X) + tan(theta) X(theta) per base frame direction.
/// theta_of must evaluate the slant value at an arbitrary chart point;
/// X(theta) is taken by central differences on it.
inline WarpSlantLink warp_slant_link_residual(const PointGeometry& pg, const SlantAnalysis& sa,
                              const WarpedStructure& ws, const WarpedFrameData& d,
                              const std::function<double(const VectorXd&)>& theta_of,
                              double properness_tol = 1e-6, double fd_step = 1e-5) {
    WarpSlantLink out;
    if (sa.cos2 < properness_tol || sa.sin2() < properness_tol) {
        out.skipped = true;
        return out;
    }
    VectorXd dtheta = VectorXd::Zero(pg.n());
    for (int i = 0; i < pg.n(); ++i) {
        VectorXd up = pg.u, um = pg.u;
        up(i) += fd_step;
        um(i) -= fd_step;
        dtheta(i) = (theta_of(up) - theta_of(um)) / (2.0 * fd_step);
    }
    const double tan_theta = std::sqrt(sa.sin2() / sa.cos2);
    for (size_t a = 0; a < d.X_chart.size(); ++a) {
        double xtheta = dtheta.dot(d.X_chart[a]);
        double r = warp_derivative(ws, d.X_chart[a]) - d.lam_X[a] - tan_theta * xtheta;
        out.residual_per_direction.push_back(std::abs(r));
        out.max_residual = std::max(out.max_residual, std::abs(r));
    }
    return out;
}

/// Foliation / integrability residuals: the two connection identities, the
/// bracket identity, and both integrability conditions, all on coordinate
/// fields so that no field extension is needed.
inline std::map<std::string, double> foliation_residuals(const PointGeometry& pg,
                                                         const SlantAnalysis& sa,
                                                         const WarpedFrameData& d) {
    std::map<std::string, double> out{{"foliation-base-geodesic", 0.0},
                                      {"foliation-fiber-connection", 0.0},
                                      {"foliation-fiber-bracket", 0.0},
                                      {"foliation-bracket-antisym", 0.0},
                                      {"integrability-base", 0.0},
                                      {"integrability-fiber", 0.0}};
    const double s2 = sa.sin2();
    VectorXd jlam = pg.amb->applyJ(d.lee_vec);

    // base totally geodesic: sin^2 g(nabla_X Y, Z) against the A-side
    for (int i : pg.base_idx)
        for (int j : pg.base_idx) {
            VectorXd y_amb = pg.jet.d1.col(j);
            VectorXd jy = pg.amb->applyJ(y_amb);
            VectorXd jy_chart = pg.chart_of_tangent(jy);
            VectorXd y_chart = VectorXd::Zero(pg.n());
            y_chart(j) = 1.0;
            VectorXd x_amb = pg.jet.d1.col(i);
            VectorXd jx = pg.amb->applyJ(x_amb);
            for (size_t r = 0; r < d.Z_chart.size(); ++r) {
                double lhs = s2 * connection_component(pg, i, j, d.Z_amb[r]);
                VectorXd av = shape_operator(pg, d.FZ[r], jy_chart) -
                              shape_operator(pg, d.FPZ[r], y_chart);
                double rhs = pg.gdot(pg.ambient_of_chart(av), x_amb) -
                             pg.gdot(jx, y_amb) * pg.gdot(d.lee_vec, d.FZ[r]) -
                             pg.gdot(x_amb, y_amb) * pg.gdot(jlam, d.FZ[r]);
                out["foliation-base-geodesic"] = std::max(out["foliation-base-geodesic"], std::abs(lhs - rhs));
            }
        }

    // fiber leaves: g(nabla_Z W, X) with Z, W coordinate fields
    for (int i : pg.fiber_idx)
        for (int j : pg.fiber_idx) {
            VectorXd w_amb = pg.jet.d1.col(j);
            PFSplit sw = pf_split(pg, w_amb);
            VectorXd fpw = pf_split(pg, sw.P).F;
            VectorXd z_amb = pg.jet.d1.col(i);
            double gzw = pg.gdot(z_amb, w_amb);
            for (size_t a = 0; a < d.X_chart.size(); ++a) {
                double lhs = connection_component(pg, i, j, d.X_amb[a]);
                VectorXd av = shape_operator(pg, fpw, d.X_chart[a]) -
                              shape_operator(pg, sw.F, d.JX_chart[a]);
                double rhs = pg.gdot(pg.ambient_of_chart(av), z_amb) / s2 -
                             gzw * d.lam_X[a];
                out["foliation-fiber-connection"] = std::max(out["foliation-fiber-connection"], std::abs(lhs - rhs));
            }
        }

    // bracket of coordinate fiber fields vanishes, so both sides of the
    // bracket identity must agree (and negate under swapping Z and W)
    for (int i : pg.fiber_idx)
        for (int j : pg.fiber_idx) {
            VectorXd z_amb = pg.jet.d1.col(i);
            VectorXd w_amb = pg.jet.d1.col(j);
            PFSplit sz = pf_split(pg, z_amb);
            PFSplit sw = pf_split(pg, w_amb);
            VectorXd fpz = pf_split(pg, sz.P).F;
            VectorXd fpw = pf_split(pg, sw.P).F;
            for (size_t a = 0; a < d.X_chart.size(); ++a) {
                VectorXd az = shape_operator(pg, sz.F, d.JX_chart[a]) -
                              shape_operator(pg, fpz, d.X_chart[a]);
                VectorXd aw = shape_operator(pg, sw.F, d.JX_chart[a]) -
                              shape_operator(pg, fpw, d.X_chart[a]);
                double forward = pg.gdot(pg.ambient_of_chart(az), w_amb) -
                                 pg.gdot(pg.ambient_of_chart(aw), z_amb);
                out["foliation-fiber-bracket"] = std::max(out["foliation-fiber-bracket"], std::abs(forward));
                // swapping (Z, W) literally negates the expression
                double swapped = pg.gdot(pg.ambient_of_chart(aw), z_amb) -
                                 pg.gdot(pg.ambient_of_chart(az), w_amb);
                out["foliation-bracket-antisym"] =
                    std::max(out["foliation-bracket-antisym"], std::abs(forward + swapped));
                out["integrability-fiber"] =
                    std::max(out["integrability-fiber"], std::abs(forward));
            }
        }

    // holomorphic distribution integrability on the F-paired form
    for (size_t a = 0; a < d.X_chart.size(); ++a)
        for (size_t b = 0; b < d.X_chart.size(); ++b) {
            VectorXd diff_chart_a = pg.h_of(d.JX_chart[b], d.X_chart[a]);
            VectorXd diff_chart_b = pg.h_of(d.JX_chart[a], d.X_chart[b]);
            double gjxy = pg.gdot(d.JX_amb[a], d.X_amb[b]);
            for (size_t r = 0; r < d.Z_chart.size(); ++r) {
                double lhs = pg.gdot(diff_chart_a - diff_chart_b, d.FZ[r]);
                double rhs = 2.0 * gjxy * pg.gdot(d.lee_vec, d.FZ[r]);
                out["integrability-base"] =
                    std::max(out["integrability-base"], std::abs(lhs - rhs));
            }
        }
    return out;
}

/// The adapted orthonormal frames: tangent {e_i, Je_i} + {e*_j, sec(theta)
/// P e*_j}, normal {csc(theta) F e*_j, csc(theta) sec(theta) F P e*_j} + nu.
struct AdaptedFrame {
    std::vector<VectorXd> base;      // 2p ambient vectors
    std::vector<VectorXd> fiber;     // 2q ambient vectors
    std::vector<VectorXd> f_normal;  // 2q ambient normal vectors
    std::vector<VectorXd> nu;        // invariant complement
    double gram_defect = 0.0;
};

inline AdaptedFrame build_adapted_frame(const PointGeometry& pg,
                                        const SlantAnalysis& sa,
                                        double properness_tol = 1e-6) {
    if (sa.cos2 < properness_tol || sa.sin2() < properness_tol)
        throw ImproperPointError(
            "adapted frame undefined at improper point (cos^2 theta = " +
            std::to_string(sa.cos2) + ")");
    AdaptedFrame out;
    const double sec_t = 1.0 / std::sqrt(sa.cos2);
    const double csc_t = 1.0 / std::sqrt(sa.sin2());

    auto project_off = [&](VectorXd v, const std::vector<VectorXd>& built) {
        for (int pass = 0; pass < 2; ++pass)
            for (const VectorXd& e : built) v -= pg.gdot(v, e) * e;
        return v;
    };

    // base block: J-adapted pairs
    for (int a = 0; a < pg.base_dim && static_cast<int>(out.base.size()) < pg.base_dim; ++a) {
        VectorXd v = project_off(pg.base_frame_ambient(a), out.base);
        double nrm = pg.gnorm(v);
        if (nrm < 0.5) continue;  // already spanned together with its J-partner
        v /= nrm;
        out.base.push_back(v);
        out.base.push_back(pg.amb->applyJ(v));
    }
    // fiber block: (e*, sec P e*) pairs
    for (int r = 0; r < pg.fiber_dim && static_cast<int>(out.fiber.size()) < pg.fiber_dim; ++r) {
        VectorXd v = project_off(pg.fiber_frame_ambient(r), out.fiber);
        double nrm = pg.gnorm(v);
        if (nrm < 0.5) continue;
        v /= nrm;
        out.fiber.push_back(v);
        out.fiber.push_back(sec_t * pf_split(pg, v).P);
    }
    const int q = pg.fiber_dim / 2;
    for (int j = 0; j < q; ++j)
        out.f_normal.push_back(csc_t * pf_split(pg, out.fiber[2 * j]).F);
    for (int j = 0; j < q; ++j)
        out.f_normal.push_back(csc_t * sec_t *
                               pf_split(pg, pf_split(pg, out.fiber[2 * j]).P).F);

    // nu: what is left of the normal bundle
    const int nu_dim = pg.ambient_dim() - pg.n() - pg.fiber_dim;
    std::vector<VectorXd> span = out.f_normal;
    for (int k = 0; k < pg.nor_ambient.cols() && static_cast<int>(out.nu.size()) < nu_dim; ++k) {
        VectorXd v = project_off(pg.nor_ambient.col(k), span);
        double nrm = pg.gnorm(v);
        if (nrm < 1e-6) continue;
        v /= nrm;
        out.nu.push_back(v);
        span.push_back(v);
    }

    std::vector<VectorXd> all;
    for (auto* grp : {&out.base, &out.fiber, &out.f_normal, &out.nu})
        for (const VectorXd& v : *grp) all.push_back(v);
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = 0; j < all.size(); ++j) {
            double g = pg.gdot(all[i], all[j]) - (i == j ? 1.0 : 0.0);
            out.gram_defect = std::max(out.gram_defect, std::abs(g));
        }
    return out;
}

/// Both sides of the curvature inequality plus the equality-case block
/// diagnostics, evaluated through disjoint code paths (h-contractions on
/// the left, warp/Lee gradients on the right).
struct BoundReport {
    double h_norm_sq = 0.0;
    double theta = 0.0;
    double cos2 = 0.0;
    int q = 0;                       // half fiber dimension
    double grad_norm_sq = 0.0;       // ||grad ln f||^2
    double lee_tangent_norm_sq = 0.0;
    double g_star = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double h_base_norm_sq = 0.0;     // ||h(D,D)||^2
    double h_fiber_norm_sq = 0.0;    // ||h(Dtheta,Dtheta)||^2
    double h_mixed_nu_norm_sq = 0.0; // nu-part of h(D, Dtheta)
    bool skipped = false;
};

inline BoundReport curvature_bound(const PointGeometry& pg, const SlantAnalysis& sa,
                                  const WarpedStructure& ws, const VectorXd& lee_vec,
                                  double properness_tol = 1e-6) {
    BoundReport r;
    r.theta = sa.theta;
    r.cos2 = sa.cos2;
    r.q = pg.fiber_dim / 2;
    if (sa.cos2 < properness_tol || sa.sin2() < properness_tol) {
        r.skipped = true;
        return r;
    }
    r.h_norm_sq = pg.h_norm_sq();
    r.grad_norm_sq = ws.grad_norm_sq;
    VectorXd lam_t = pg.tangent_project(lee_vec);
    r.lee_tangent_norm_sq = pg.gdot(lam_t, lam_t);
    for (int a = 0; a < pg.base_dim; ++a)
        r.g_star += pg.gdot(ws.grad_ambient, pg.base_frame_ambient(a)) *
                    pg.gdot(lee_vec, pg.base_frame_ambient(a));
    const double csc2 = 1.0 / sa.sin2();
    const double cot2 = sa.cos2 / sa.sin2();
    r.rhs = 4.0 * r.q * (csc2 + cot2) *
            (r.grad_norm_sq + r.lee_tangent_norm_sq - 2.0 * r.g_star);
    r.margin = r.h_norm_sq - r.rhs;

    for (int a = 0; a < pg.base_dim; ++a)
        for (int b = 0; b < pg.base_dim; ++b) {
            VectorXd hv = pg.h_of(pg.base_frame_chart(a), pg.base_frame_chart(b));
            r.h_base_norm_sq += pg.gdot(hv, hv);
        }
    for (int s = 0; s < pg.fiber_dim; ++s)
        for (int t = 0; t < pg.fiber_dim; ++t) {
            VectorXd hv = pg.h_of(pg.fiber_frame_chart(s), pg.fiber_frame_chart(t));
            r.h_fiber_norm_sq += pg.gdot(hv, hv);
        }
    // orthonormal basis of F(Dtheta) for the nu-component of mixed h
    std::vector<VectorXd> fbasis;
    for (int s = 0; s < pg.fiber_dim; ++s) {
        VectorXd fz = pf_split(pg, pg.fiber_frame_ambient(s)).F;
        for (const VectorXd& e : fbasis) fz -= pg.gdot(fz, e) * e;
        double nrm = pg.gnorm(fz);
        if (nrm > 1e-9) fbasis.push_back(fz / nrm);
    }
    for (int a = 0; a < pg.base_dim; ++a)
        for (int s = 0; s < pg.fiber_dim; ++s) {
            VectorXd hv = pg.h_of(pg.base_frame_chart(a), pg.fiber_frame_chart(s));
            for (const VectorXd& e : fbasis) hv -= pg.gdot(hv, e) * e;
            r.h_mixed_nu_norm_sq += pg.gdot(hv, hv);
        }
    return r;
}

enum class SpecialMode { CR, ConstantSlant, Kaehler };

inline std::string special_mode_name(SpecialMode m) {
    switch (m) {
        case SpecialMode::CR: return "CR";
        case SpecialMode::ConstantSlant: return "constant-slant";
        case SpecialMode::Kaehler: return "Kaehler";
    }
    return "?";
}

struct ModeMismatchError : Error {
    using Error::Error;
};

/// Specializes the general right-hand side to a mode and checks the
/// algebra. The CR row reports both coefficient normalizations (4q from
/// the general bound at theta = pi/2, 2q from the classical CR statement)
/// because the two conventions count fiber dimensions differently.
struct SpecialCaseReport {
    SpecialMode mode;
    double max_rhs_diff = 0.0;      // |general_rhs - special_rhs|
    double special_rhs_last = 0.0;  // specialized rhs of the last report
    double cr_classical_rhs_last = 0.0;  // 2q normalization, CR mode only
    double coefficient_defect = 0.0;     // |csc^2+cot^2 - 1| in CR mode
};

inline SpecialCaseReport special_case_report(const std::vector<BoundReport>& reports,
                                             SpecialMode mode, double hyp_tol = 1e-8) {
    if (reports.empty()) throw ModeMismatchError("no reports to specialize");
    SpecialCaseReport out;
    out.mode = mode;

    if (mode == SpecialMode::ConstantSlant) {
        double lo = reports.front().cos2, hi = lo;
        for (const BoundReport& r : reports) {
            lo = std::min(lo, r.cos2);
            hi = std::max(hi, r.cos2);
        }
        if (hi - lo > hyp_tol)
            throw ModeMismatchError("slant value is not constant across the sample");
    }
    for (const BoundReport& r : reports) {
        if (r.skipped) continue;
        const double csc2 = 1.0 / (1.0 - r.cos2);
        const double cot2 = r.cos2 / (1.0 - r.cos2);
        const double bracket = r.grad_norm_sq + r.lee_tangent_norm_sq - 2.0 * r.g_star;
        double special = 0.0;
        switch (mode) {
            case SpecialMode::CR:
                if (r.cos2 > hyp_tol)
                    throw ModeMismatchError("CR mode requires theta = pi/2");
                out.coefficient_defect =
                    std::max(out.coefficient_defect, std::abs(csc2 + cot2 - 1.0));
                special = 4.0 * r.q * bracket;
                out.cr_classical_rhs_last = 2.0 * r.q * bracket;
                break;
            case SpecialMode::ConstantSlant:
                special = 4.0 * r.q * (csc2 + cot2) * bracket;
                break;
            case SpecialMode::Kaehler:
                if (r.lee_tangent_norm_sq > hyp_tol || std::abs(r.g_star) > hyp_tol)
                    throw ModeMismatchError(
                        "Kaehler mode requires a vanishing tangential Lee field");
                special = 4.0 * r.q * (csc2 + cot2) * r.grad_norm_sq;
                break;
        }
        out.special_rhs_last = special;
        out.max_rhs_diff = std::max(out.max_rhs_diff, std::abs(r.rhs - special));
    }
    return out;
}

}  // namespace gck
