#pragma once

#include <Eigen/Dense>
#include <limits>
#include <numbers>

#include "wavecone/pde_operator.hpp"
#include "wavecone/rng.hpp"

namespace wavecone::testing {

/// Scalar curl in the plane, A mu = d_1 mu_2 - d_2 mu_1, built by hand so the
/// sign convention is pinned independently of the catalog.
inline PdeOperator scalar_curl_2d() {
    PdeOperator op(2, 2, 1, "scalar_curl");
    Eigen::MatrixXd a1(1, 2), a2(1, 2);
    a1 << 0.0, 1.0;   // d_1 acts on mu_2
    a2 << -1.0, 0.0;  // -d_2 acts on mu_1
    op.add_term(MultiIndex::unit(2, 0), a1);
    op.add_term(MultiIndex::unit(2, 1), a2);
    return op;
}

/// d_1 on scalars in the plane; the generic-rank-drop example.
inline PdeOperator d1_on_scalars_2d() {
    PdeOperator op(2, 1, 1, "d1_scalar");
    Eigen::MatrixXd a(1, 1);
    a << 1.0;
    op.add_term(MultiIndex::unit(2, 0), a);
    return op;
}

inline Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
    return m;
}

inline Eigen::VectorXd random_unit_vector(Rng& rng, int n) {
    Eigen::VectorXd v(n);
    double norm = 0.0;
    do {
        for (int i = 0; i < n; ++i) v[i] = rng.normal();
        norm = v.norm();
    } while (norm < 1e-12);
    return v / norm;
}

/// Dense sweep of the unit circle followed by golden-section polish on the
/// bracketing arc: independent minimizer of |A^k(xi) v| used as the
/// membership oracle in d = 2. Stays clear of the sampled/refined path.
inline double circle_sweep_min(const PdeOperator& op, const Eigen::VectorXd& v, int points) {
    const auto value = [&](double theta) {
        Eigen::VectorXd xi(2);
        xi << std::cos(theta), std::sin(theta);
        return (op.principal_symbol(xi) * v.cast<std::complex<double>>()).norm();
    };
    double best = std::numeric_limits<double>::infinity();
    double best_theta = 0.0;
    for (int i = 0; i < points; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / points;
        const double r = value(theta);
        if (r < best) {
            best = r;
            best_theta = theta;
        }
    }
    // Golden-section on the bracketing arc.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = best_theta - 2.0 * std::numbers::pi / points;
    double hi = best_theta + 2.0 * std::numbers::pi / points;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = value(c), fd = value(d);
    for (int it = 0; it < 80; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = value(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = value(d);
        }
    }
    return std::min({best, fc, fd});
}

inline Eigen::VectorXd flatten_row_major(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v(m.rows() * m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) v[r * m.cols() + c] = m(r, c);
    return v;
}

}  // namespace wavecone::testing
