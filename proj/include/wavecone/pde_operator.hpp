#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>

#include "wavecone/multi_index.hpp"

namespace wavecone {

/// Constant-coefficient linear PDE operator sum_{|alpha|<=k} A_alpha d^alpha,
/// acting on R^m-valued measures in R^d with values in R^n.
///
/// Terms are kept in a map ordered lexicographically on alpha, so iteration
/// order (and hence serialization) does not depend on insertion order.
class PdeOperator {
public:
    PdeOperator(int d, int m, int n, std::string label = "")
        : d_(d), m_(m), n_(n), label_(std::move(label)) {
        if (d < 1 || m < 1 || n < 1)
            throw DimensionError("PdeOperator dimensions must be positive");
    }

    int dimension() const { return d_; }
    int source_dim() const { return m_; }
    int target_dim() const { return n_; }
    const std::string& label() const { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }

    const std::map<MultiIndex, Eigen::MatrixXd>& terms() const { return terms_; }

    /// Adds A_alpha (accumulating if alpha is already present).
    void add_term(const MultiIndex& alpha, const Eigen::MatrixXd& coeff);

    /// Operator order k = max |alpha| over nonzero coefficients.
    /// Zero coefficient matrices never contribute.
    int order() const;

    /// Full symbol sum_{|alpha|<=k} (2 pi i)^{|alpha|} A_alpha xi^alpha.
    Eigen::MatrixXcd full_symbol(const Eigen::VectorXd& xi) const;

    /// Principal symbol (2 pi i)^k sum_{|alpha|=k} A_alpha xi^alpha.
    Eigen::MatrixXcd principal_symbol(const Eigen::VectorXd& xi) const;

    /// Real part of the principal polynomial, sum_{|alpha|=k} A_alpha xi^alpha.
    /// The principal symbol is (2 pi i)^k times this; kernels and ranks agree.
    Eigen::MatrixXd principal_polynomial(const Eigen::VectorXd& xi) const;

    PdeOperator operator+(const PdeOperator& other) const;

private:
    int d_, m_, n_;
    std::string label_;
    std::map<MultiIndex, Eigen::MatrixXd> terms_;
};

/// xi^alpha by repeated multiplication (exact at zero and negative entries).
double monomial(const Eigen::VectorXd& xi, const MultiIndex& alpha);

/// (2 pi i)^p by repeated multiplication.
std::complex<double> two_pi_i_pow(int p);

/// Extends op to act on R^{m+n}-valued measures (mu, sigma) as op(mu) - sigma,
/// absorbing a measure right-hand side into an extra 0th-order block.
/// The principal symbol kernel becomes Ker A^k(xi) x R^n.
PdeOperator augment_with_rhs(const PdeOperator& op);

/// Operator spec file I/O (UTF-8 JSON). Serialization is canonical: terms
/// sorted lexicographically on alpha, so parse -> serialize is idempotent
/// byte-for-byte.
std::string to_spec_json(const PdeOperator& op);
PdeOperator from_spec_json(const std::string& text);
PdeOperator load_operator_spec(const std::string& path);
void save_operator_spec(const PdeOperator& op, const std::string& path);

}  // namespace wavecone
