#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "wavecone/pde_operator.hpp"
#include "wavecone/sphere.hpp"

namespace wavecone {

/// Result of a wave-cone membership query for a vector v.
///
/// `residual` is min over sampled+refined unit xi of |A^k(xi) v| / |v|; it is
/// invariant under rescaling v. `min_symbol_norm` is the same minimum without
/// the |v| normalization (the raw |A^k(xi) v|), which is the quantity with
/// closed-form values for specific inputs (e.g. 2 pi for the identity against
/// the divergence operator in d = 2).
struct ConeVerdict {
    bool member = false;
    std::optional<Eigen::VectorXd> witness_xi;  // unit vector, present iff member
    double residual = 0.0;
    double min_symbol_norm = 0.0;
    int samples_used = 0;
    bool refined = false;
};

/// Min/max numerical rank of the principal symbol over sphere samples.
/// violation_pair holds two frequencies with differing ranks when found.
struct RankProfile {
    int min_rank = 0;
    int max_rank = 0;
    std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> violation_pair;

    bool constant_rank() const { return min_rank == max_rank; }
};

/// Orthonormal basis of the real null space of the principal symbol at xi.
/// Since A^k(xi) is a unimodular complex multiple of a real matrix, the null
/// space over real vectors is that of the real principal polynomial.
/// Singular values below rel_tol * sigma_max count as zero.
std::vector<Eigen::VectorXd> kernel_basis(const PdeOperator& op, const Eigen::VectorXd& xi,
                                          double rel_tol = 1e-8);

/// Wave-cone membership of v: minimizes |A^k(xi) v| / |v| over sampled unit
/// frequencies, then refines locally around the best sample. Member iff the
/// refined residual is <= tol. Deterministic for a fixed sampling.
ConeVerdict in_wave_cone(const PdeOperator& op, const Eigen::VectorXd& v, double tol = 1e-6,
                         const SphereSampling& sampling = {});

/// Checks Murat's constant-rank condition by sampling. If all sampled ranks
/// agree, additionally tries to drive the smallest retained singular value to
/// zero by sphere descent, so isolated rank drops (a measure-zero set that
/// sampling alone cannot hit) are still reported.
RankProfile constant_rank_check(const PdeOperator& op, const SphereSampling& sampling = {},
                                double rel_tol = 1e-8);

struct ConeProfileEntry {
    Eigen::VectorXd xi;
    double residual;         // |A^k(xi) v| / |v|
    double symbol_norm;      // |A^k(xi) v|
};

/// Sampled residual landscape for v, sorted by residual ascending
/// (ties broken by lexicographically smaller xi).
std::vector<ConeProfileEntry> cone_distance_profile(const PdeOperator& op,
                                                    const Eigen::VectorXd& v,
                                                    const SphereSampling& sampling = {});

}  // namespace wavecone
