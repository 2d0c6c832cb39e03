#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "gcklab/ambient.hpp"
#include "gcklab/jets.hpp"
#include "gcklab/linalg.hpp"

namespace gck {

/// Parametrized immersion of an n-dimensional chart into R^{2m} with the
/// chart coordinates partitioned into a holomorphic (base) block and a
/// slant (fiber) block. The split is declared, not detected.
struct Immersion {
    int n = 0;
    int ambient_dim = 0;
    SmoothMap phi;
    std::function<bool(const VectorXd&)> chart_domain;  // empty = everywhere
    std::vector<int> base_indices;
    std::vector<int> fiber_indices;
    std::string name;

    bool admits(const VectorXd& u) const { return !chart_domain || chart_domain(u); }

    Jet2 jet(const VectorXd& u) const {
        if (!admits(u))
            throw DomainError("chart point outside declared domain of " + name);
        return evaluate_jet(phi, u);
    }

    Immersion with_split(std::vector<int> base, std::vector<int> fiber) const {
        Immersion out = *this;
        out.base_indices = std::move(base);
        out.fiber_indices = std::move(fiber);
        return out;
    }
};

/// Per-point bundle: frames, metric, second fundamental form, and the
/// helpers every identity check needs. Tangent frame columns are ordered
/// base block first, then fiber block; both chart and ambient components
/// are kept so connection terms and h contractions stay cheap.
struct PointGeometry {
    VectorXd u;                 // chart point
    VectorXd x;                 // ambient point phi(u)
    Jet2 jet;
    double weight = 1.0;        // e^{-f(x)}
    VectorXd f_gradient;        // grad of the conformal exponent at x

    MatrixXd induced;           // n x n coordinate induced metric
    MatrixXd tan_chart;         // n x n, columns = chart comps of frame vectors
    MatrixXd tan_ambient;       // 2m x n, same frame in ambient components
    MatrixXd nor_ambient;       // 2m x (2m-n) orthonormal normal frame
    int base_dim = 0;           // 2p
    int fiber_dim = 0;          // 2q
    std::vector<int> base_idx;  // chart indices of the base block
    std::vector<int> fiber_idx; // chart indices of the fiber block

    // h(d_i, d_j) as ambient normal vectors, row-major in (i, j)
    std::vector<VectorXd> h_coord;
    VectorXd mean_curvature;    // ambient normal vector

    const AmbientSpace* amb = nullptr;

    int n() const { return static_cast<int>(induced.rows()); }
    int ambient_dim() const { return static_cast<int>(x.size()); }

    double gdot(const VectorXd& v, const VectorXd& w) const {
        return weight * v.dot(w);
    }
    double gnorm(const VectorXd& v) const { return std::sqrt(std::max(gdot(v, v), 0.0)); }

    const VectorXd& h_ij(int i, int j) const { return h_coord[i * n() + j]; }

    /// h on tangent vectors given by chart components.
    VectorXd h_of(const VectorXd& cx, const VectorXd& cy) const {
        VectorXd out = VectorXd::Zero(ambient_dim());
        for (int i = 0; i < n(); ++i) {
            if (cx(i) == 0.0) continue;
            for (int j = 0; j < n(); ++j)
                if (cy(j) != 0.0) out += cx(i) * cy(j) * h_ij(i, j);
        }
        return out;
    }

    VectorXd ambient_of_chart(const VectorXd& c) const { return jet.d1 * c; }

    /// Chart components of a tangent ambient vector (solves the induced
    /// metric normal equations).
    VectorXd chart_of_tangent(const VectorXd& v) const {
        VectorXd rhs(n());
        for (int i = 0; i < n(); ++i) rhs(i) = gdot(jet.d1.col(i), v);
        return solve_spd(induced, rhs);
    }

    VectorXd tangent_project(const VectorXd& v) const {
        VectorXd out = VectorXd::Zero(ambient_dim());
        for (int k = 0; k < tan_ambient.cols(); ++k)
            out += gdot(v, tan_ambient.col(k)) * tan_ambient.col(k);
        return out;
    }
    VectorXd normal_project(const VectorXd& v) const {
        VectorXd out = VectorXd::Zero(ambient_dim());
        for (int k = 0; k < nor_ambient.cols(); ++k)
            out += gdot(v, nor_ambient.col(k)) * nor_ambient.col(k);
        return out;
    }

    VectorXd base_frame_chart(int a) const { return tan_chart.col(a); }
    VectorXd base_frame_ambient(int a) const { return tan_ambient.col(a); }
    VectorXd fiber_frame_chart(int r) const { return tan_chart.col(base_dim + r); }
    VectorXd fiber_frame_ambient(int r) const { return tan_ambient.col(base_dim + r); }

    double tangent_normal_defect() const {
        double worst = 0.0;
        for (int a = 0; a < tan_ambient.cols(); ++a)
            for (int b = 0; b < nor_ambient.cols(); ++b)
                worst = std::max(worst,
                                 std::abs(gdot(tan_ambient.col(a), nor_ambient.col(b))));
        return worst;
    }

    double h_symmetry_defect() const {
        double worst = 0.0;
        for (int i = 0; i < n(); ++i)
            for (int j = i + 1; j < n(); ++j)
                worst = std::max(worst, (h_ij(i, j) - h_ij(j, i)).norm());
        return worst;
    }

    /// Sum over the orthonormal tangent frame of g(h(ei,ej), h(ei,ej)).
    double h_norm_sq() const {
        double acc = 0.0;
        for (int a = 0; a < n(); ++a)
            for (int b = 0; b < n(); ++b) {
                VectorXd hv = h_of(tan_chart.col(a), tan_chart.col(b));
                acc += gdot(hv, hv);
            }
        return acc;
    }
};

/// Builds the per-point geometry: frames via Gram-Schmidt under the
/// conformal metric (base columns first so the declared split survives),
/// normal frame by largest-residual-first projection of the ambient
/// coordinate basis, and h from second derivatives plus the ambient
/// Christoffel correction.
inline PointGeometry point_geometry(const Immersion& imm, const AmbientSpace& amb,
                                    const VectorXd& u, double rank_tol = 1e-10) {
    PointGeometry pg;
    pg.amb = &amb;
    pg.u = u;
    pg.jet = imm.jet(u);
    pg.x = pg.jet.value;
    pg.weight = amb.conformal_weight(pg.x);
    pg.f_gradient = amb.f_grad(pg.x);

    const int n = imm.n;
    const int ad = amb.dim();
    pg.base_dim = static_cast<int>(imm.base_indices.size());
    pg.fiber_dim = static_cast<int>(imm.fiber_indices.size());
    pg.base_idx = imm.base_indices;
    pg.fiber_idx = imm.fiber_indices;

    pg.induced.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            pg.induced(i, j) =
                pg.gdot(pg.jet.d1.col(i), pg.jet.d1.col(j));

    // tangent frame: Gram-Schmidt the Jacobian columns in split order,
    // tracked simultaneously in chart and ambient components
    std::vector<int> order = imm.base_indices;
    order.insert(order.end(), imm.fiber_indices.begin(), imm.fiber_indices.end());
    if (static_cast<int>(order.size()) != n)
        throw DomainError("split does not cover the chart of " + imm.name);

    auto inner = [&](const VectorXd& a, const VectorXd& b) { return pg.gdot(a, b); };
    pg.tan_chart = MatrixXd::Zero(n, n);
    pg.tan_ambient = MatrixXd::Zero(ad, n);
    int built = 0;
    for (int idx : order) {
        VectorXd c = VectorXd::Zero(n);
        c(idx) = 1.0;
        VectorXd v = pg.jet.d1.col(idx);
        const double original = std::sqrt(std::max(inner(v, v), 0.0));
        for (int pass = 0; pass < 2; ++pass)
            for (int k = 0; k < built; ++k) {
                double pr = inner(v, pg.tan_ambient.col(k));
                v -= pr * pg.tan_ambient.col(k);
                c -= pr * pg.tan_chart.col(k);
            }
        const double nrm = std::sqrt(std::max(inner(v, v), 0.0));
        if (original <= 0.0 || nrm <= rank_tol * std::max(original, 1.0))
            throw DegenerateImmersionError(
                "rank collapse of " + imm.name + " at chart direction " +
                std::to_string(idx));
        pg.tan_chart.col(built) = c / nrm;
        pg.tan_ambient.col(built) = v / nrm;
        ++built;
    }

    // normal frame: greedy largest-residual-first over the ambient basis
    std::vector<bool> used(ad, false);
    std::vector<VectorXd> normals;
    for (int pick = 0; pick < ad - n; ++pick) {
        int best = -1;
        double best_res = -1.0;
        VectorXd best_vec;
        for (int a = 0; a < ad; ++a) {
            if (used[a]) continue;
            VectorXd e = VectorXd::Zero(ad);
            e(a) = 1.0;
            VectorXd w = e;
            for (int k = 0; k < n; ++k) w -= inner(w, pg.tan_ambient.col(k)) * pg.tan_ambient.col(k);
            for (const VectorXd& nn : normals) w -= inner(w, nn) * nn;
            double res = std::sqrt(std::max(inner(w, w), 0.0));
            if (res > best_res) { best_res = res; best = a; best_vec = w; }
        }
        if (best < 0 || best_res <= rank_tol)
            throw DegenerateImmersionError("cannot complete normal frame for " + imm.name);
        used[best] = true;
        // re-orthogonalize once for the 1e-9 frame contract
        VectorXd w = best_vec;
        for (int k = 0; k < n; ++k) w -= inner(w, pg.tan_ambient.col(k)) * pg.tan_ambient.col(k);
        for (const VectorXd& nn : normals) w -= inner(w, nn) * nn;
        normals.push_back(w / std::sqrt(inner(w, w)));
    }
    pg.nor_ambient = MatrixXd::Zero(ad, ad - n);
    for (int k = 0; k < ad - n; ++k) pg.nor_ambient.col(k) = normals[k];

    // second fundamental form: normal part of d2 phi + Gamma(d1, d1)
    pg.h_coord.assign(n * n, VectorXd::Zero(ad));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            VectorXd second = VectorXd::Zero(ad);
            for (int k = 0; k < ad; ++k) second(k) = pg.jet.d2[k](i, j);
            second += amb.gamma_contract(pg.f_gradient, pg.jet.d1.col(i),
                                         pg.jet.d1.col(j));
            pg.h_coord[i * n + j] = pg.normal_project(second);
        }

    pg.mean_curvature = VectorXd::Zero(ad);
    for (int a = 0; a < n; ++a)
        pg.mean_curvature += pg.h_of(pg.tan_chart.col(a), pg.tan_chart.col(a));
    pg.mean_curvature /= n;
    return pg;
}

/// A_xi X solved from g(A_xi X, Y) = g(h(X, Y), xi); X in chart
/// components, result in chart components.
inline VectorXd shape_operator(const PointGeometry& pg, const VectorXd& xi,
                               const VectorXd& chart_x) {
    const int n = pg.n();
    VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            if (chart_x(j) != 0.0) acc += chart_x(j) * pg.gdot(pg.h_ij(i, j), xi);
        rhs(i) = acc;
    }
    return solve_spd(pg.induced, rhs);
}

/// Max duality defect |g(h(X,Y),xi) - g(A_xi X, Y)| over all frame
/// combinations (tangent frame pairs x normal frame).
inline double gauss_weingarten_check(const PointGeometry& pg) {
    double worst = 0.0;
    for (int r = 0; r < pg.nor_ambient.cols(); ++r) {
        VectorXd xi = pg.nor_ambient.col(r);
        for (int a = 0; a < pg.n(); ++a) {
            VectorXd ax = shape_operator(pg, xi, pg.tan_chart.col(a));
            VectorXd ax_amb = pg.ambient_of_chart(ax);
            for (int b = 0; b < pg.n(); ++b) {
                double lhs = pg.gdot(pg.h_of(pg.tan_chart.col(a), pg.tan_chart.col(b)), xi);
                double rhs = pg.gdot(ax_amb, pg.tan_ambient.col(b));
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    }
    return worst;
}

/// Full ambient covariant derivative of the coordinate field d_j along
/// d_i (constant chart-coefficient fields only).
inline VectorXd coordinate_connection(const PointGeometry& pg, int i, int j) {
    const int ad = pg.ambient_dim();
    VectorXd out(ad);
    for (int k = 0; k < ad; ++k) out(k) = pg.jet.d2[k](i, j);
    out += pg.amb->gamma_contract(pg.f_gradient, pg.jet.d1.col(i),
                                  pg.jet.d1.col(j));
    return out;
}

/// g(nabla_{d_i} d_j, Z) for tangent Z (ambient components); equals the
/// intrinsic connection component by tangency of Z.
inline double connection_component(const PointGeometry& pg, int i, int j,
                                   const VectorXd& z_ambient) {
    return pg.gdot(coordinate_connection(pg, i, j), z_ambient);
}

}  // namespace gck
