#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gcklab/jets.hpp"
#include "gcklab/linalg.hpp"

namespace gck {

/// Closed library of conformal exponents f on R^{2m}. All families except
/// linear_x2 depend only on (x1, y1); linear_x2 exists as a negative
/// control that breaks the warped-product block structure downstream.
struct ConformalFactor {
    enum class Family { Constant, LinearX1, ProductX1Y1, GaussianBump, LinearX2 };

    Family family = Family::Constant;
    double amplitude = 0.0;   // overall coefficient (constant value for Constant)
    double center = 0.0;      // gaussian center (both x1 and y1)
    double width = 1.0;       // gaussian width

    static ConformalFactor flat() { return {}; }
    static ConformalFactor linear_x1(double a = 1.0) {
        return {Family::LinearX1, a, 0.0, 1.0};
    }
    static ConformalFactor product_x1y1(double a = 1.0) {
        return {Family::ProductX1Y1, a, 0.0, 1.0};
    }
    static ConformalFactor gaussian(double a = 1.0, double c = 0.0, double w = 1.0) {
        return {Family::GaussianBump, a, c, w};
    }
    static ConformalFactor linear_x2(double a = 1.0) {
        return {Family::LinearX2, a, 0.0, 1.0};
    }

    bool is_constant() const {
        return family == Family::Constant || amplitude == 0.0;
    }

    std::string name() const {
        switch (family) {
            case Family::Constant: return "constant";
            case Family::LinearX1: return "linear-x1";
            case Family::ProductX1Y1: return "product-x1y1";
            case Family::GaussianBump: return "gaussian-bump";
            case Family::LinearX2: return "linear-x2";
        }
        return "?";
    }

    template <class Scalar>
    Scalar eval(const std::vector<Scalar>& x, int m) const {
        using std::exp;
        const Scalar& x1 = x[0];
        const Scalar& y1 = x[m];
        switch (family) {
            case Family::Constant:
                return Scalar(x1 * 0.0 + amplitude);
            case Family::LinearX1:
                return amplitude * x1;
            case Family::ProductX1Y1:
                return amplitude * x1 * y1;
            case Family::GaussianBump: {
                Scalar dx = x1 - center, dy = y1 - center;
                return amplitude * exp((dx * dx + dy * dy) * (-0.5 / (width * width)));
            }
            case Family::LinearX2:
                return amplitude * x[1];
        }
        return Scalar(x1 * 0.0);
    }
};

struct LeeCalibration {
    double sign = -1.0;
    double scale = 1.0;
    double residual = 0.0;  // max per-sample structure-identity residual
    bool valid = false;
};

struct TwoFormCheck {
    double residual_calibrated = 0.0;  // alpha = sign*scale*df
    double residual_unit_scale = 0.0;  // alpha = sign*df
};

/// Globally conformal Kaehler ambient (R^{2m}, J, e^{-f} g0). J is the
/// canonical structure J(x,y) = (-y, x). The Lee convention (sign, scale)
/// is data: it is fixed by calibrate() against the structure identity and
/// threaded through every identity that mentions the Lee field.
class AmbientSpace {
  public:
    AmbientSpace(int half_dim, ConformalFactor factor)
        : m_(half_dim), f_(std::move(factor)) {}

    int half_dim() const { return m_; }
    int dim() const { return 2 * m_; }
    const ConformalFactor& factor() const { return f_; }

    VectorXd applyJ(const VectorXd& v) const {
        VectorXd out(2 * m_);
        out.head(m_) = -v.tail(m_);
        out.tail(m_) = v.head(m_);
        return out;
    }

    double f_value(const VectorXd& x) const {
        std::vector<double> xs(x.data(), x.data() + x.size());
        return f_.eval(xs, m_);
    }

    /// Value, gradient, Hessian of f at x (Taylor arithmetic, exact).
    void f_jet(const VectorXd& x, double& value, VectorXd& grad, MatrixXd& hess) const {
        const int n = 2 * m_;
        std::vector<Dual2> xs;
        xs.reserve(n);
        for (int i = 0; i < n; ++i) xs.push_back(Dual2::variable(x(i), n, i));
        Dual2 r = f_.eval(xs, m_);
        value = r.v;
        grad = r.g;
        hess = 0.5 * (r.h + r.h.transpose());
    }

    VectorXd f_grad(const VectorXd& x) const {
        double v; VectorXd g; MatrixXd h;
        f_jet(x, v, g, h);
        return g;
    }

    double conformal_weight(const VectorXd& x) const { return std::exp(-f_value(x)); }

    double metric(const VectorXd& x, const VectorXd& v, const VectorXd& w) const {
        return conformal_weight(x) * v.dot(w);
    }

    /// Christoffel symbols of e^{-f} g0 in closed conformal form:
    /// Gamma^k_ij = -1/2 (f_i d_jk + f_j d_ik - f_k d_ij).
    std::vector<MatrixXd> christoffel(const VectorXd& x) const {
        const int n = 2 * m_;
        VectorXd fg = f_grad(x);
        std::vector<MatrixXd> gamma(n, MatrixXd::Zero(n, n));
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double v = 0.0;
                    if (j == k) v += fg(i);
                    if (i == k) v += fg(j);
                    if (i == j) v -= fg(k);
                    gamma[k](i, j) = -0.5 * v;
                }
        return gamma;
    }

    /// Gamma(U, V) contracted against precomputed grad f; avoids building
    /// the full 3-array in inner loops.
    VectorXd gamma_contract(const VectorXd& f_gradient, const VectorXd& u,
                            const VectorXd& v) const {
        return -0.5 * (f_gradient.dot(u) * v + f_gradient.dot(v) * u -
                       u.dot(v) * f_gradient);
    }

    void set_convention(double sign, double scale) {
        cal_.sign = sign;
        cal_.scale = scale;
        cal_.residual = 0.0;
        cal_.valid = true;
    }
    bool calibrated() const { return cal_.valid; }
    const LeeCalibration& calibration() const { return cal_; }

    /// Lee form alpha = sign*scale*df as a coordinate covector.
    VectorXd lee_form(const VectorXd& x) const {
        require_calibrated();
        return cal_.sign * cal_.scale * f_grad(x);
    }

    /// Lee vector lambda = alpha^# raised with e^{-f} g0.
    VectorXd lee_vector(const VectorXd& x) const {
        require_calibrated();
        return cal_.sign * cal_.scale * std::exp(f_value(x)) * f_grad(x);
    }

    /// (nabla_V J)W computed from Christoffel symbols with V, W extended
    /// as constant coordinate fields.
    VectorXd nabla_J(const VectorXd& x, const VectorXd& v, const VectorXd& w) const {
        VectorXd fg = f_grad(x);
        VectorXd jw = applyJ(w);
        return gamma_contract(fg, v, jw) - applyJ(gamma_contract(fg, v, w));
    }

    /// Right-hand side of the structure identity with unit sign*scale;
    /// the actual convention multiplies this bracket.
    VectorXd structure_bracket(const VectorXd& x, const VectorXd& v,
                               const VectorXd& w) const {
        VectorXd fg = f_grad(x);
        VectorXd jv = applyJ(v), jw = applyJ(w), jfg = applyJ(fg);
        return fg.dot(jw) * v - fg.dot(w) * jv + jv.dot(w) * fg + v.dot(w) * jfg;
    }

    double nabla_J_residual(const VectorXd& x, const VectorXd& v,
                            const VectorXd& w) const {
        require_calibrated();
        VectorXd lhs = nabla_J(x, v, w);
        VectorXd rhs = cal_.sign * cal_.scale * structure_bracket(x, v, w);
        return (lhs - rhs).norm();
    }

    /// Fits (sign, scale) by least squares of the structure identity over
    /// the samples; sign from the fitted coefficient, scale its magnitude.
    /// Throws CalibrationDegenerateError when grad f carries no signal.
    LeeCalibration calibrate(const std::vector<VectorXd>& sample_points,
                             double accept_tol = 1e-5, unsigned vec_seed = 7u) {
        if (sample_points.size() < 2)
            throw CalibrationDegenerateError("calibration needs sample points");
        std::mt19937 rng(vec_seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        double num = 0.0, den = 0.0;
        struct Sample { VectorXd lhs, bracket; };
        std::vector<Sample> samples;
        for (const VectorXd& x : sample_points) {
            VectorXd v(2 * m_), w(2 * m_);
            for (int i = 0; i < 2 * m_; ++i) { v(i) = dist(rng); w(i) = dist(rng); }
            VectorXd lhs = nabla_J(x, v, w);
            VectorXd b = structure_bracket(x, v, w);
            num += lhs.dot(b);
            den += b.squaredNorm();
            samples.push_back({std::move(lhs), std::move(b)});
        }
        if (den < 1e-14)
            throw CalibrationDegenerateError(
                "conformal factor has (numerically) vanishing gradient: "
                "no Lee data to calibrate against");
        const double sc = num / den;
        LeeCalibration fit;
        fit.sign = sc < 0.0 ? -1.0 : 1.0;
        fit.scale = std::abs(sc);
        fit.residual = 0.0;
        for (const Sample& s : samples)
            fit.residual = std::max(fit.residual, (s.lhs - sc * s.bracket).norm());
        if (fit.residual >= accept_tol)
            throw CalibrationDegenerateError(
                "no (sign, scale) pair brings the structure-identity residual "
                "under " + std::to_string(accept_tol) +
                " (best residual " + std::to_string(fit.residual) + ")");
        fit.valid = true;
        cal_ = fit;
        return fit;
    }

    /// Max residual of d(Omega) = alpha ^ Omega over coordinate triples,
    /// with d(Omega) from first derivatives of Omega's coefficient
    /// functions. Reported for both candidate scalings of alpha, since the
    /// structure identity and the two-form identity need not share one.
    TwoFormCheck fundamental_two_form_check(const VectorXd& x) const {
        require_calibrated();
        const int n = 2 * m_;
        // Omega_jk(x) = e^{-f(x)} * C_jk with C_jk = e_j . J e_k
        MatrixXd c(n, n);
        for (int k = 0; k < n; ++k) {
            VectorXd ek = VectorXd::Zero(n);
            ek(k) = 1.0;
            c.col(k) = applyJ(ek);
        }
        // first derivatives of the conformal weight from its jet
        std::vector<Dual2> xs;
        for (int i = 0; i < n; ++i) xs.push_back(Dual2::variable(x(i), n, i));
        Dual2 wgt = exp(-f_.eval(xs, m_));
        const double w0 = wgt.v;
        const VectorXd dw = wgt.g;

        VectorXd alpha_cal = cal_.sign * cal_.scale * f_grad(x);
        VectorXd alpha_unit = cal_.sign * f_grad(x);
        TwoFormCheck out;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = j + 1; k < n; ++k) {
                    double dom = dw(i) * c(j, k) - dw(j) * c(i, k) + dw(k) * c(i, j);
                    auto wedge = [&](const VectorXd& a) {
                        return w0 * (a(i) * c(j, k) - a(j) * c(i, k) + a(k) * c(i, j));
                    };
                    out.residual_calibrated =
                        std::max(out.residual_calibrated, std::abs(dom - wedge(alpha_cal)));
                    out.residual_unit_scale =
                        std::max(out.residual_unit_scale, std::abs(dom - wedge(alpha_unit)));
                }
        return out;
    }

  private:
    void require_calibrated() const {
        if (!cal_.valid) throw UncalibratedConventionError();
    }

    int m_;
    ConformalFactor f_;
    LeeCalibration cal_;
};

/// Uniform sample points in [-1,1]^{2m}, deterministic in the seed.
inline std::vector<VectorXd> sample_ambient_points(int dim, int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<VectorXd> pts;
    pts.reserve(count);
    for (int s = 0; s < count; ++s) {
        VectorXd x(dim);
        for (int i = 0; i < dim; ++i) x(i) = dist(rng);
        pts.push_back(std::move(x));
    }
    return pts;
}

}  // namespace gck
