#include "wavecone/pde_operator.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace wavecone {

void PdeOperator::add_term(const MultiIndex& alpha, const Eigen::MatrixXd& coeff) {
    if (alpha.dimension() != d_)
        throw DimensionError("multi-index dimension " + std::to_string(alpha.dimension()) +
                             " does not match operator dimension " + std::to_string(d_));
    if (coeff.rows() != n_ || coeff.cols() != m_)
        throw DimensionError("coefficient matrix must be n x m = " + std::to_string(n_) + " x " +
                             std::to_string(m_));
    auto [it, inserted] = terms_.emplace(alpha, coeff);
    if (!inserted) it->second += coeff;
}

int PdeOperator::order() const {
    int k = -1;
    for (const auto& [alpha, coeff] : terms_) {
        if (!coeff.isZero(0.0)) k = std::max(k, alpha.order());
    }
    if (k < 0) throw OperatorIsZero("operator '" + label_ + "' has no nonzero term");
    return k;
}

double monomial(const Eigen::VectorXd& xi, const MultiIndex& alpha) {
    double p = 1.0;
    for (int i = 0; i < alpha.dimension(); ++i) {
        for (int rep = 0; rep < alpha[i]; ++rep) p *= xi[i];
    }
    return p;
}

std::complex<double> two_pi_i_pow(int p) {
    const std::complex<double> base(0.0, 2.0 * std::numbers::pi);
    std::complex<double> c(1.0, 0.0);
    for (int rep = 0; rep < p; ++rep) c *= base;
    return c;
}

Eigen::MatrixXcd PdeOperator::full_symbol(const Eigen::VectorXd& xi) const {
    if (xi.size() != d_) throw DimensionError("xi must have length d");
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n_, m_);
    for (const auto& [alpha, coeff] : terms_)
        s += two_pi_i_pow(alpha.order()) * monomial(xi, alpha) * coeff;
    return s;
}

Eigen::MatrixXd PdeOperator::principal_polynomial(const Eigen::VectorXd& xi) const {
    if (xi.size() != d_) throw DimensionError("xi must have length d");
    const int k = order();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_, m_);
    for (const auto& [alpha, coeff] : terms_) {
        if (alpha.order() == k) s += monomial(xi, alpha) * coeff;
    }
    return s;
}

Eigen::MatrixXcd PdeOperator::principal_symbol(const Eigen::VectorXd& xi) const {
    return two_pi_i_pow(order()) * principal_polynomial(xi).cast<std::complex<double>>();
}

PdeOperator PdeOperator::operator+(const PdeOperator& other) const {
    if (d_ != other.d_ || m_ != other.m_ || n_ != other.n_)
        throw DimensionError("operator sum requires matching (d, m, n)");
    PdeOperator sum(d_, m_, n_, label_ + "+" + other.label_);
    for (const auto& [alpha, coeff] : terms_) sum.add_term(alpha, coeff);
    for (const auto& [alpha, coeff] : other.terms_) sum.add_term(alpha, coeff);
    return sum;
}

PdeOperator augment_with_rhs(const PdeOperator& op) {
    if (op.order() < 1)
        throw UnsupportedOrderZero("augmentation needs order >= 1 so the identity block stays "
                                   "below the principal part");
    const int d = op.dimension(), m = op.source_dim(), n = op.target_dim();
    PdeOperator aug(d, m + n, n, op.label() + "~rhs");
    for (const auto& [alpha, coeff] : op.terms()) {
        Eigen::MatrixXd wide = Eigen::MatrixXd::Zero(n, m + n);
        wide.leftCols(m) = coeff;
        aug.add_term(alpha, wide);
    }
    Eigen::MatrixXd id_block = Eigen::MatrixXd::Zero(n, m + n);
    id_block.rightCols(n) = -Eigen::MatrixXd::Identity(n, n);
    aug.add_term(MultiIndex::zero(d), id_block);
    return aug;
}

namespace {

using ordered_json = nlohmann::ordered_json;

}  // namespace

std::string to_spec_json(const PdeOperator& op) {
    ordered_json j;
    j["label"] = op.label();
    j["d"] = op.dimension();
    j["m"] = op.source_dim();
    j["n"] = op.target_dim();
    j["terms"] = ordered_json::array();
    for (const auto& [alpha, coeff] : op.terms()) {
        ordered_json term;
        term["alpha"] = alpha.entries();
        ordered_json rows = ordered_json::array();
        for (Eigen::Index r = 0; r < coeff.rows(); ++r) {
            ordered_json row = ordered_json::array();
            for (Eigen::Index c = 0; c < coeff.cols(); ++c) row.push_back(coeff(r, c));
            rows.push_back(row);
        }
        term["matrix"] = rows;
        j["terms"].push_back(term);
    }
    return j.dump(2) + "\n";
}

PdeOperator from_spec_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid operator spec JSON: ") + e.what());
    }
    try {
        PdeOperator op(j.at("d").get<int>(), j.at("m").get<int>(), j.at("n").get<int>(),
                       j.value("label", std::string{}));
        for (const auto& term : j.at("terms")) {
            MultiIndex alpha(term.at("alpha").get<std::vector<int>>());
            const auto& rows = term.at("matrix");
            Eigen::MatrixXd coeff(op.target_dim(), op.source_dim());
            if (static_cast<int>(rows.size()) != op.target_dim())
                throw ParseError("matrix row count must equal n");
            for (int r = 0; r < op.target_dim(); ++r) {
                const auto& row = rows.at(static_cast<std::size_t>(r));
                if (static_cast<int>(row.size()) != op.source_dim())
                    throw ParseError("matrix column count must equal m");
                for (int c = 0; c < op.source_dim(); ++c)
                    coeff(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
            }
            op.add_term(alpha, coeff);
        }
        return op;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed operator spec: ") + e.what());
    }
}

PdeOperator load_operator_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open operator spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_spec_json(buf.str());
}

void save_operator_spec(const PdeOperator& op, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write operator spec file: " + path);
    out << to_spec_json(op);
}

}  // namespace wavecone
