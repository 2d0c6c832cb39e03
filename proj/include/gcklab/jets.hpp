#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "gcklab/errors.hpp"

namespace gck {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Truncated second-order Taylor number over n seed directions:
/// value, gradient and (symmetric) Hessian propagate exactly through
/// arithmetic, so derivatives come out at machine precision instead of
/// the ~1e-5 of divided differences.
class Dual2 {
  public:
    double v = 0.0;
    VectorXd g;   // length n
    MatrixXd h;   // n x n, symmetric

    Dual2() : g(0), h(0, 0) {}
    Dual2(double value, int n) : v(value), g(VectorXd::Zero(n)), h(MatrixXd::Zero(n, n)) {}

    static Dual2 variable(double value, int n, int index) {
        Dual2 d(value, n);
        d.g(index) = 1.0;
        return d;
    }
    static Dual2 constant(double value, int n) { return Dual2(value, n); }

    int dim() const { return static_cast<int>(g.size()); }

    Dual2 operator-() const {
        Dual2 r = *this;
        r.v = -r.v; r.g = -r.g; r.h = -r.h;
        return r;
    }

    Dual2& operator+=(const Dual2& o) { v += o.v; g += o.g; h += o.h; return *this; }
    Dual2& operator-=(const Dual2& o) { v -= o.v; g -= o.g; h -= o.h; return *this; }

    friend Dual2 operator+(Dual2 a, const Dual2& b) { a += b; return a; }
    friend Dual2 operator-(Dual2 a, const Dual2& b) { a -= b; return a; }
    friend Dual2 operator+(Dual2 a, double c) { a.v += c; return a; }
    friend Dual2 operator+(double c, Dual2 a) { a.v += c; return a; }
    friend Dual2 operator-(Dual2 a, double c) { a.v -= c; return a; }
    friend Dual2 operator-(double c, const Dual2& a) { return (-a) + c; }

    friend Dual2 operator*(const Dual2& a, const Dual2& b) {
        Dual2 r(a.v * b.v, a.dim());
        r.g = a.g * b.v + b.g * a.v;
        r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
        return r;
    }
    friend Dual2 operator*(Dual2 a, double c) { a.v *= c; a.g *= c; a.h *= c; return a; }
    friend Dual2 operator*(double c, Dual2 a) { return a * c; }

    friend Dual2 operator/(const Dual2& a, const Dual2& b) { return a * inverse(b); }
    friend Dual2 operator/(Dual2 a, double c) { return a * (1.0 / c); }
    friend Dual2 operator/(double c, const Dual2& b) { return inverse(b) * c; }

    /// Composes f(u) given f(u0), f'(u0), f''(u0) at u0 = v via the
    /// second-order chain rule.
    static Dual2 compose(const Dual2& u, double f, double fp, double fpp) {
        Dual2 r(f, u.dim());
        r.g = fp * u.g;
        r.h = fp * u.h + fpp * (u.g * u.g.transpose());
        return r;
    }

    friend Dual2 inverse(const Dual2& u) {
        double iv = 1.0 / u.v;
        return compose(u, iv, -iv * iv, 2.0 * iv * iv * iv);
    }
    friend Dual2 sin(const Dual2& u) { return compose(u, std::sin(u.v), std::cos(u.v), -std::sin(u.v)); }
    friend Dual2 cos(const Dual2& u) { return compose(u, std::cos(u.v), -std::sin(u.v), -std::cos(u.v)); }
    friend Dual2 exp(const Dual2& u) {
        double e = std::exp(u.v);
        return compose(u, e, e, e);
    }
    friend Dual2 log(const Dual2& u) {
        double iv = 1.0 / u.v;
        return compose(u, std::log(u.v), iv, -iv * iv);
    }
    friend Dual2 sqrt(const Dual2& u) {
        double s = std::sqrt(u.v);
        return compose(u, s, 0.5 / s, -0.25 / (s * u.v));
    }
    friend Dual2 pow(const Dual2& u, double p) {
        return compose(u, std::pow(u.v, p), p * std::pow(u.v, p - 1.0),
                       p * (p - 1.0) * std::pow(u.v, p - 2.0));
    }
    friend Dual2 sqr(const Dual2& u) { return u * u; }
};

/// A smooth map evaluated on Taylor numbers; the chart point arrives as
/// seeded variables and the ambient components come back with their full
/// 2-jets attached.
using SmoothMap = std::function<std::vector<Dual2>(const std::vector<Dual2>&)>;

/// Value, Jacobian and Hessian stack of a map at one chart point.
struct Jet2 {
    VectorXd value;               // length dim_out
    MatrixXd d1;                  // dim_out x n
    std::vector<MatrixXd> d2;     // dim_out entries, each n x n

    int dim_out() const { return static_cast<int>(value.size()); }
    int dim_in() const { return d1.cols() > 0 ? static_cast<int>(d1.cols()) : 0; }

    double schwarz_defect() const {
        double worst = 0.0;
        for (const MatrixXd& m : d2)
            worst = std::max(worst, (m - m.transpose()).cwiseAbs().maxCoeff());
        return worst;
    }
};

inline Jet2 evaluate_jet(const SmoothMap& map, const VectorXd& u) {
    const int n = static_cast<int>(u.size());
    std::vector<Dual2> in;
    in.reserve(n);
    for (int i = 0; i < n; ++i) in.push_back(Dual2::variable(u(i), n, i));
    std::vector<Dual2> out = map(in);
    Jet2 jet;
    const int m = static_cast<int>(out.size());
    jet.value.resize(m);
    jet.d1.resize(m, n);
    jet.d2.reserve(m);
    for (int k = 0; k < m; ++k) {
        jet.value(k) = out[k].v;
        jet.d1.row(k) = out[k].g.transpose();
        // store the symmetrized Hessian; Taylor arithmetic keeps it
        // symmetric to rounding anyway
        jet.d2.push_back(0.5 * (out[k].h + out[k].h.transpose()));
    }
    return jet;
}

inline Jet2 evaluate_jet_checked(const SmoothMap& map, const VectorXd& u,
                                 const std::function<bool(const VectorXd&)>& domain) {
    if (domain && !domain(u)) throw DomainError("chart point outside declared domain");
    return evaluate_jet(map, u);
}

}  // namespace gck
