#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "wavecone/errors.hpp"

namespace wavecone {

/// Strictly increasing index tuples of length k over {0, ..., d-1} in
/// lexicographic order; the shared basis indexing for k-vectors and k-covectors.
class TupleBasis {
public:
    TupleBasis(int d, int k);

    int size() const { return static_cast<int>(tuples_.size()); }
    const std::vector<int>& tuple(int index) const { return tuples_[static_cast<std::size_t>(index)]; }
    const std::vector<std::vector<int>>& tuples() const { return tuples_; }

    /// Rank of a strictly increasing tuple; -1 if not strictly increasing.
    int index_of(const std::vector<int>& tuple) const;

private:
    int d_, k_;
    std::vector<std::vector<int>> tuples_;
};

long long binomial(int n, int k);

/// Core wedge kernel on coefficient arrays in the increasing-tuple basis,
/// templated on the scalar so tests can run it in exact arithmetic.
/// out must have size C(d, p+q) and be zero-initialized.
template <typename Scalar>
void wedge_accumulate(int d, int p, int q, const Scalar* a, const Scalar* b, Scalar* out) {
    const TupleBasis basis_a(d, p), basis_b(d, q), basis_out(d, p + q);
    std::vector<int> merged;
    merged.reserve(static_cast<std::size_t>(p + q));
    for (int ia = 0; ia < basis_a.size(); ++ia) {
        const auto& s = basis_a.tuple(ia);
        for (int ib = 0; ib < basis_b.size(); ++ib) {
            const auto& t = basis_b.tuple(ib);
            // Count inversions between s and t; overlapping tuples wedge to zero.
            int inversions = 0;
            bool disjoint = true;
            for (int x : s) {
                for (int y : t) {
                    if (x == y) { disjoint = false; break; }
                    if (x > y) ++inversions;
                }
                if (!disjoint) break;
            }
            if (!disjoint) continue;
            merged.clear();
            merged.insert(merged.end(), s.begin(), s.end());
            merged.insert(merged.end(), t.begin(), t.end());
            std::sort(merged.begin(), merged.end());
            const int out_index = basis_out.index_of(merged);
            const Scalar term = a[ia] * b[ib];
            if (inversions % 2 == 0)
                out[out_index] = out[out_index] + term;
            else
                out[out_index] = out[out_index] - term;
        }
    }
}

/// k-vector in Lambda_k(R^d), coefficients on e_{i1} ^ ... ^ e_{ik} in
/// lexicographic tuple order. Degree 0 is a scalar (one coefficient).
struct KVector {
    int d = 0;
    int k = 0;
    Eigen::VectorXd coeffs;

    KVector() = default;
    KVector(int d_, int k_);
    KVector(int d_, int k_, Eigen::VectorXd c);

    /// Basis k-vector for a strictly increasing tuple of axes.
    static KVector basis(int d, const std::vector<int>& tuple);

    double norm() const { return coeffs.norm(); }
};

/// 1-covectors and general k-covectors (dual basis dx^{i1} ^ ... ^ dx^{ik});
/// the pairing with KVector is the dot product of coefficient arrays.
struct KCovector {
    int d = 0;
    int k = 0;
    Eigen::VectorXd coeffs;

    KCovector() = default;
    KCovector(int d_, int k_);
    KCovector(int d_, int k_, Eigen::VectorXd c);

    static KCovector basis(int d, const std::vector<int>& tuple);

    /// omega_xi(w) = w . xi for a frequency xi.
    static KCovector from_frequency(const Eigen::VectorXd& xi);

    double norm() const { return coeffs.norm(); }
};

double pairing(const KVector& v, const KCovector& omega);

KVector wedge(const KVector& a, const KVector& b);
KCovector wedge(const KCovector& a, const KCovector& b);

/// Interior product v |_ eta with a 1-covector eta, defined by duality:
/// <v |_ eta, omega> = <v, eta ^ omega> for all (k-1)-covectors omega
/// (eta wedged on the left).
KVector interior_product(const KVector& v, const KCovector& eta);

/// Matrix of omega -> v |_ omega over 1-covectors, C(d, k-1) x d.
Eigen::MatrixXd contraction_matrix(const KVector& v);

/// Matrix of the fixed contraction w -> w |_ dx^axis on Lambda_k,
/// C(d, k-1) x C(d, k).
Eigen::MatrixXd axis_contraction_matrix(int d, int k, int axis);

/// True iff v is decomposable as v_1 ^ ... ^ v_k, tested as
/// dim{x : x ^ v = 0} == k with singular values cut at rel_tol * sigma_max.
bool is_simple(const KVector& v, double rel_tol = 1e-10);

/// Unit 1-covector omega with v_i |_ omega = 0 for every i, if one exists.
/// The stacked contraction matrices are run through an SVD; a trailing
/// singular value below rel_tol * sigma_max yields the kernel direction.
/// Sign convention: the largest-magnitude component is made positive.
std::optional<KCovector> annihilator_covector(const std::vector<KVector>& vs,
                                              double rel_tol = 1e-10);

/// Text format: "d k c_1 ... c_{C(d,k)}", whitespace-separated.
std::string to_text(const KVector& v);
KVector kvector_from_text(const std::string& text);

}  // namespace wavecone
