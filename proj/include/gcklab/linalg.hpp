#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "gcklab/errors.hpp"

namespace gck {

using InnerProduct = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

inline InnerProduct euclidean_inner() {
    return [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b); };
}

/// A list of ambient vectors together with their Gram matrix under the
/// inner product they were built with.
struct GramFrame {
    std::vector<Eigen::VectorXd> vectors;
    Eigen::MatrixXd gram;
    bool orthonormal = false;

    int size() const { return static_cast<int>(vectors.size()); }

    double orthonormality_defect() const {
        if (gram.rows() == 0) return 0.0;
        return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols()))
            .cwiseAbs()
            .maxCoeff();
    }
};

inline Eigen::MatrixXd gram_matrix(const std::vector<Eigen::VectorXd>& vecs,
                                   const InnerProduct& inner) {
    const int k = static_cast<int>(vecs.size());
    Eigen::MatrixXd g(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j <= i; ++j) {
            g(i, j) = inner(vecs[i], vecs[j]);
            g(j, i) = g(i, j);
        }
    return g;
}

/// Classical Gram-Schmidt with one re-orthogonalization pass, no pivoting:
/// output order is determined by input order. Throws DegenerateFrameError
/// naming the first vector whose residual falls under rank_tol relative to
/// its original length.
inline GramFrame gram_schmidt(const std::vector<Eigen::VectorXd>& input,
                              const InnerProduct& inner, double rank_tol = 1e-10) {
    GramFrame out;
    for (int i = 0; i < static_cast<int>(input.size()); ++i) {
        Eigen::VectorXd w = input[i];
        const double original = std::sqrt(std::max(inner(w, w), 0.0));
        for (int pass = 0; pass < 2; ++pass)
            for (const Eigen::VectorXd& e : out.vectors) w -= inner(w, e) * e;
        const double nrm = std::sqrt(std::max(inner(w, w), 0.0));
        if (original <= 0.0 || nrm <= rank_tol * original)
            throw DegenerateFrameError(i, original > 0.0 ? nrm / original : 0.0);
        out.vectors.push_back(w / nrm);
    }
    out.gram = gram_matrix(out.vectors, inner);
    out.orthonormal = out.orthonormality_defect() < 1e-9;
    return out;
}

/// Cholesky factor of a symmetric positive definite matrix; throws
/// NotSpdError with the 1-based failing leading minor.
inline Eigen::MatrixXd cholesky_spd(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double d = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > 0.0)) throw NotSpdError(j + 1);
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i)
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
    return l;
}

inline Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    Eigen::MatrixXd l = cholesky_spd(a);
    Eigen::VectorXd y = l.triangularView<Eigen::Lower>().solve(b);
    Eigen::VectorXd x = l.transpose().triangularView<Eigen::Upper>().solve(y);
    // one step of iterative refinement keeps the residual at 1e-10*||b||
    // even for mildly conditioned induced metrics
    Eigen::VectorXd r = b - a * x;
    Eigen::VectorXd dy = l.triangularView<Eigen::Lower>().solve(r);
    x += l.transpose().triangularView<Eigen::Upper>().solve(dy);
    return x;
}

inline Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd x(a.rows(), b.cols());
    for (int c = 0; c < b.cols(); ++c) x.col(c) = solve_spd(a, Eigen::VectorXd(b.col(c)));
    return x;
}

}  // namespace gck
