#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wavecone/errors.hpp"

namespace wavecone {

/// Flattening conventions for symmetric-matrix and symmetric-tensor values.
///
/// Symmetric d x d matrices use channels indexed by pairs p <= q in
/// lexicographic order, off-diagonal channels scaled by sqrt(2) so the
/// Euclidean channel norm equals the Frobenius norm of the matrix.

int sym_channel_count(int d);

/// Channel index of the unordered pair (p, q), p <= q after sorting.
int sym_pair_index(int d, int p, int q);

/// Weight of the matrix entry (p, q) in its channel: 1 on the diagonal,
/// 1/sqrt(2) off it, i.e. M_pq = weight * c_{pair(p,q)}.
double sym_entry_weight(int p, int q);

Eigen::VectorXd sym_flatten(const Eigen::MatrixXd& m);
Eigen::MatrixXd sym_unflatten(const Eigen::VectorXd& c, int d);

/// Non-decreasing index tuples of length r over {0, ..., d-1} in lexicographic
/// order: the multiset basis for symmetric r-linear maps. Channel values carry
/// sqrt(multiplicity) weights so the channel norm matches the full-tensor
/// Euclidean norm.
class MultisetBasis {
public:
    MultisetBasis(int d, int r);

    int size() const { return static_cast<int>(tuples_.size()); }
    const std::vector<int>& tuple(int index) const { return tuples_[static_cast<std::size_t>(index)]; }

    /// Index of a tuple (sorted internally); -1 if entries out of range.
    int index_of(std::vector<int> tuple) const;

    /// Number of distinct permutations of the tuple, r! / prod(counts!).
    long long multiplicity(int index) const { return mult_[static_cast<std::size_t>(index)]; }

    int dimension() const { return d_; }
    int rank() const { return r_; }

private:
    int d_, r_;
    std::vector<std::vector<int>> tuples_;
    std::vector<long long> mult_;
};

/// Channels of the symmetric tensor a (x) xi^{(x) r} for a scalar component:
/// channel(beta) = sqrt(mult(beta)) * xi^beta. The full value for a vector a
/// is the Kronecker a (x) this.
Eigen::VectorXd sym_power_channels(const MultisetBasis& basis, const Eigen::VectorXd& xi);

}  // namespace wavecone
