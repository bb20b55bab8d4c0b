#include "wavecone/exterior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wavecone {

long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long long c = 1;
    for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
    return c;
}

TupleBasis::TupleBasis(int d, int k) : d_(d), k_(k) {
    if (d < 0 || k < 0 || k > d) throw DimensionError("TupleBasis needs 0 <= k <= d");
    std::vector<int> current(static_cast<std::size_t>(k));
    // Iterative lexicographic enumeration.
    for (int i = 0; i < k; ++i) current[static_cast<std::size_t>(i)] = i;
    if (k == 0) {
        tuples_.push_back({});
        return;
    }
    while (true) {
        tuples_.push_back(current);
        int pos = k - 1;
        while (pos >= 0 && current[static_cast<std::size_t>(pos)] == d - k + pos) --pos;
        if (pos < 0) break;
        ++current[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < k; ++i)
            current[static_cast<std::size_t>(i)] = current[static_cast<std::size_t>(i - 1)] + 1;
    }
}

int TupleBasis::index_of(const std::vector<int>& tuple) const {
    if (static_cast<int>(tuple.size()) != k_) return -1;
    // Lexicographic rank via the combinatorial number system.
    long long rank = 0;
    int prev = -1;
    for (int i = 0; i < k_; ++i) {
        const int t = tuple[static_cast<std::size_t>(i)];
        if (t <= prev || t >= d_) return -1;
        for (int j = prev + 1; j < t; ++j) rank += binomial(d_ - 1 - j, k_ - 1 - i);
        prev = t;
    }
    return static_cast<int>(rank);
}

KVector::KVector(int d_, int k_) : d(d_), k(k_) {
    if (k < 0 || k > d) throw DimensionError("k-vector degree must satisfy 0 <= k <= d");
    coeffs = Eigen::VectorXd::Zero(binomial(d, k));
}

KVector::KVector(int d_, int k_, Eigen::VectorXd c) : d(d_), k(k_), coeffs(std::move(c)) {
    if (k < 0 || k > d) throw DimensionError("k-vector degree must satisfy 0 <= k <= d");
    if (coeffs.size() != binomial(d, k))
        throw DimensionError("k-vector needs C(d,k) coefficients");
}

KVector KVector::basis(int d, const std::vector<int>& tuple) {
    KVector v(d, static_cast<int>(tuple.size()));
    const TupleBasis basis(d, v.k);
    const int idx = basis.index_of(tuple);
    if (idx < 0) throw DimensionError("basis tuple must be strictly increasing in range");
    v.coeffs[idx] = 1.0;
    return v;
}

KCovector::KCovector(int d_, int k_) : d(d_), k(k_) {
    if (k < 0 || k > d) throw DimensionError("k-covector degree must satisfy 0 <= k <= d");
    coeffs = Eigen::VectorXd::Zero(binomial(d, k));
}

KCovector::KCovector(int d_, int k_, Eigen::VectorXd c) : d(d_), k(k_), coeffs(std::move(c)) {
    if (k < 0 || k > d) throw DimensionError("k-covector degree must satisfy 0 <= k <= d");
    if (coeffs.size() != binomial(d, k))
        throw DimensionError("k-covector needs C(d,k) coefficients");
}

KCovector KCovector::basis(int d, const std::vector<int>& tuple) {
    KCovector w(d, static_cast<int>(tuple.size()));
    const TupleBasis basis(d, w.k);
    const int idx = basis.index_of(tuple);
    if (idx < 0) throw DimensionError("basis tuple must be strictly increasing in range");
    w.coeffs[idx] = 1.0;
    return w;
}

KCovector KCovector::from_frequency(const Eigen::VectorXd& xi) {
    return KCovector(static_cast<int>(xi.size()), 1, xi);
}

double pairing(const KVector& v, const KCovector& omega) {
    if (v.d != omega.d || v.k != omega.k)
        throw DimensionError("pairing needs matching dimension and degree");
    return v.coeffs.dot(omega.coeffs);
}

namespace {

Eigen::VectorXd wedge_coeffs(int d, int p, int q, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b) {
    if (p + q > d) throw DegreeOverflow("wedge degree exceeds ambient dimension");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(binomial(d, p + q));
    wedge_accumulate<double>(d, p, q, a.data(), b.data(), out.data());
    return out;
}

}  // namespace

KVector wedge(const KVector& a, const KVector& b) {
    if (a.d != b.d) throw DimensionError("wedge needs matching ambient dimension");
    return KVector(a.d, a.k + b.k, wedge_coeffs(a.d, a.k, b.k, a.coeffs, b.coeffs));
}

KCovector wedge(const KCovector& a, const KCovector& b) {
    if (a.d != b.d) throw DimensionError("wedge needs matching ambient dimension");
    return KCovector(a.d, a.k + b.k, wedge_coeffs(a.d, a.k, b.k, a.coeffs, b.coeffs));
}

KVector interior_product(const KVector& v, const KCovector& eta) {
    if (eta.k != 1) throw DimensionError("interior product contracts with a 1-covector");
    if (v.d != eta.d) throw DimensionError("interior product needs matching dimension");
    if (v.k < 1) throw DegreeUnderflow("cannot contract a 0-vector");

    const TupleBasis out_basis(v.d, v.k - 1);
    const TupleBasis in_basis(v.d, v.k);
    KVector out(v.d, v.k - 1);
    // <v |_ eta, dx^U> = <v, eta ^ dx^U>; inserting dx^i into dx^U costs
    // (-1)^{#(u in U : u < i)}.
    std::vector<int> extended(static_cast<std::size_t>(v.k));
    for (int u = 0; u < out_basis.size(); ++u) {
        const auto& tuple = out_basis.tuple(u);
        double acc = 0.0;
        for (int i = 0; i < v.d; ++i) {
            if (eta.coeffs[i] == 0.0) continue;
            if (std::binary_search(tuple.begin(), tuple.end(), i)) continue;
            int below = 0;
            for (int t : tuple)
                if (t < i) ++below;
            extended.assign(tuple.begin(), tuple.end());
            extended.insert(extended.begin() + below, i);
            const int idx = in_basis.index_of(extended);
            const double sign = (below % 2 == 0) ? 1.0 : -1.0;
            acc += sign * eta.coeffs[i] * v.coeffs[idx];
        }
        out.coeffs[u] = acc;
    }
    return out;
}

Eigen::MatrixXd contraction_matrix(const KVector& v) {
    if (v.k < 1) throw DegreeUnderflow("cannot contract a 0-vector");
    Eigen::MatrixXd mat(binomial(v.d, v.k - 1), v.d);
    for (int i = 0; i < v.d; ++i) {
        KCovector dxi = KCovector::basis(v.d, {i});
        mat.col(i) = interior_product(v, dxi).coeffs;
    }
    return mat;
}

Eigen::MatrixXd axis_contraction_matrix(int d, int k, int axis) {
    if (k < 1) throw DegreeUnderflow("cannot contract a 0-vector");
    const TupleBasis in_basis(d, k);
    Eigen::MatrixXd mat(binomial(d, k - 1), binomial(d, k));
    const KCovector dxi = KCovector::basis(d, {axis});
    for (int col = 0; col < in_basis.size(); ++col) {
        KVector e(d, k);
        e.coeffs[col] = 1.0;
        mat.col(col) = interior_product(e, dxi).coeffs;
    }
    return mat;
}

bool is_simple(const KVector& v, double rel_tol) {
    if (v.norm() <= 0.0) throw DegenerateVector("is_simple needs a nonzero k-vector");
    if (v.k == v.d) return true;  // wedge with anything overflows; {x : x ^ v = 0} = R^d
    Eigen::MatrixXd map(binomial(v.d, v.k + 1), v.d);
    for (int i = 0; i < v.d; ++i) {
        KVector e = KVector::basis(v.d, {i});
        map.col(i) = wedge(e, v).coeffs;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(map);
    const auto& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    int kernel_dim = v.d - static_cast<int>(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) <= rel_tol * sigma_max) ++kernel_dim;
    }
    if (sigma_max <= 0.0) kernel_dim = v.d;
    return kernel_dim == v.k;
}

std::optional<KCovector> annihilator_covector(const std::vector<KVector>& vs, double rel_tol) {
    if (vs.empty()) throw EmptyFamily("annihilator_covector needs at least one k-vector");
    const int d = vs.front().d;
    Eigen::Index total_rows = 0;
    for (const auto& v : vs) {
        if (v.d != d) throw DimensionError("all k-vectors must share the ambient dimension");
        if (v.norm() <= 0.0) throw DegenerateVector("annihilator_covector needs nonzero vectors");
        total_rows += binomial(d, v.k - 1);
    }
    Eigen::MatrixXd stacked(total_rows, d);
    Eigen::Index row = 0;
    for (const auto& v : vs) {
        const Eigen::MatrixXd block = contraction_matrix(v);
        stacked.middleRows(row, block.rows()) = block;
        row += block.rows();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    const double smallest = sigma.size() == d ? sigma(d - 1) : 0.0;
    if (sigma_max > 0.0 && smallest > rel_tol * sigma_max) return std::nullopt;

    Eigen::VectorXd omega = svd.matrixV().col(d - 1);
    // Fix the sign so results are reproducible.
    Eigen::Index lead;
    omega.cwiseAbs().maxCoeff(&lead);
    if (omega[lead] < 0.0) omega = -omega;
    return KCovector(d, 1, omega / omega.norm());
}

std::string to_text(const KVector& v) {
    std::ostringstream out;
    out.precision(17);
    out << v.d << " " << v.k;
    for (Eigen::Index i = 0; i < v.coeffs.size(); ++i) out << " " << v.coeffs[i];
    return out.str();
}

KVector kvector_from_text(const std::string& text) {
    std::istringstream in(text);
    int d = 0, k = 0;
    if (!(in >> d >> k)) throw ParseError("k-vector text must start with 'd k'");
    if (d < 0 || k < 0 || k > d) throw ParseError("k-vector text has invalid d or k");
    Eigen::VectorXd coeffs(binomial(d, k));
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        if (!(in >> coeffs[i]))
            throw ParseError("k-vector text needs C(d,k) coefficients");
    }
    return KVector(d, k, std::move(coeffs));
}

}  // namespace wavecone
