#include "wavecone/catalog.hpp"

#include <algorithm>
#include <cmath>

namespace wavecone {

std::string ConeClosedForm::describe() const {
    switch (tag) {
        case Tag::RankOne:
            return "{ a (x) xi : a in R^" + std::to_string(ell) + ", xi in R^" +
                   std::to_string(d) + " \\ {0} }";
        case Tag::SymmetricRankOne:
            return "{ a (.) xi : a, xi in R^" + std::to_string(d) + " }";
        case Tag::RankAtMost:
            return "{ M in R^{" + std::to_string(d) + "x" + std::to_string(d) +
                   "} : rank M <= " + std::to_string(max_rank) + " }";
        case Tag::HigherRankOne:
            return "{ a (x) xi^(x)" + std::to_string(r) + " : a in R^" + std::to_string(ell) +
                   ", xi in R^" + std::to_string(d) + " \\ {0} }";
        case Tag::CurrentAnnihilator: {
            std::string s = "{ (v_i) : exists omega != 0 with v_i |_ omega = 0, degrees (";
            for (std::size_t i = 0; i < degrees.size(); ++i)
                s += (i ? "," : "") + std::to_string(degrees[i]);
            return s + ") }";
        }
    }
    return "";
}

namespace {

bool rank_at_most(const Eigen::MatrixXd& m, int max_rank, double rel_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sigma = svd.singularValues();
    if (sigma.size() == 0 || sigma(0) <= 0.0) return true;
    if (max_rank >= sigma.size()) return true;
    return sigma(max_rank) <= rel_tol * sigma(0);
}

Eigen::MatrixXd reshape_row_major(const Eigen::VectorXd& v, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
    return m;
}

Eigen::VectorXd flatten_row_major(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v(m.rows() * m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) v[r * m.cols() + c] = m(r, c);
    return v;
}

Eigen::VectorXd random_unit(Rng& rng, int n) {
    Eigen::VectorXd v(n);
    double norm = 0.0;
    do {
        for (int i = 0; i < n; ++i) v[i] = rng.normal();
        norm = v.norm();
    } while (norm < 1e-12);
    return v / norm;
}

// Full symmetric tensor of sym channels: entry at any permutation of a
// multiset beta is channel(beta) / sqrt(mult(beta)).
Eigen::VectorXd expand_sym_tensor(const MultisetBasis& basis, const Eigen::VectorXd& channels) {
    const int d = basis.dimension(), r = basis.rank();
    long long total = 1;
    for (int i = 0; i < r; ++i) total *= d;
    Eigen::VectorXd full(total);
    std::vector<int> tuple(static_cast<std::size_t>(r));
    for (long long flat = 0; flat < total; ++flat) {
        long long rest = flat;
        for (int i = r - 1; i >= 0; --i) {
            tuple[static_cast<std::size_t>(i)] = static_cast<int>(rest % d);
            rest /= d;
        }
        const int idx = basis.index_of(tuple);
        full[flat] =
            channels[idx] / std::sqrt(static_cast<double>(basis.multiplicity(idx)));
    }
    return full;
}

bool higher_rank_one_member(const ConeClosedForm& cone, const Eigen::VectorXd& v,
                            double rel_tol) {
    const MultisetBasis basis(cone.d, cone.r);
    const int D = basis.size();
    // Rows: the a-component; columns: the symmetric tensor.
    Eigen::MatrixXd by_component = reshape_row_major(v, cone.ell, D);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(by_component, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    if (sigma(0) <= 0.0) return true;
    if (sigma.size() > 1 && sigma(1) > rel_tol * sigma(0)) return false;
    if (cone.r <= 1) return true;
    // The shared tensor factor must be a pure power: its first unfolding has
    // rank one, and symmetry upgrades that to w = c * xi^(x)r.
    const Eigen::VectorXd w = expand_sym_tensor(basis, svd.matrixV().col(0));
    long long tail = 1;
    for (int i = 0; i < cone.r - 1; ++i) tail *= cone.d;
    Eigen::MatrixXd unfolding(cone.d, tail);
    for (int i = 0; i < cone.d; ++i)
        for (long long j = 0; j < tail; ++j) unfolding(i, j) = w[i * tail + j];
    return rank_at_most(unfolding, 1, rel_tol);
}

std::vector<KVector> split_blocks(const ConeClosedForm& cone, const Eigen::VectorXd& v) {
    std::vector<KVector> blocks;
    int offset = 0;
    for (int deg : cone.degrees) {
        const int size = static_cast<int>(binomial(cone.d, deg));
        KVector block(cone.d, deg, v.segment(offset, size));
        offset += size;
        if (block.norm() > 0.0) blocks.push_back(std::move(block));
    }
    return blocks;
}

}  // namespace

bool CatalogEntry::closed_form_member(const Eigen::VectorXd& v, double rel_tol) const {
    if (v.size() != op.source_dim()) throw DimensionError("value vector has wrong length");
    switch (cone.tag) {
        case ConeClosedForm::Tag::RankOne:
            return rank_at_most(reshape_row_major(v, cone.ell, cone.d), 1, rel_tol);
        case ConeClosedForm::Tag::RankAtMost:
            return rank_at_most(reshape_row_major(v, cone.d, cone.d), cone.max_rank, rel_tol);
        case ConeClosedForm::Tag::SymmetricRankOne: {
            // a (.) xi has at most two nonzero eigenvalues of opposite sign.
            const Eigen::MatrixXd m = sym_unflatten(v, cone.d);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
            std::vector<double> lambda(eig.eigenvalues().data(),
                                       eig.eigenvalues().data() + cone.d);
            std::sort(lambda.begin(), lambda.end(),
                      [](double a, double b) { return std::abs(a) > std::abs(b); });
            const double top = std::abs(lambda[0]);
            if (top <= 0.0) return true;
            if (cone.d > 2 && std::abs(lambda[2]) > 1e-8 * top) return false;
            return lambda[0] * lambda[1] <= rel_tol * top * top;
        }
        case ConeClosedForm::Tag::HigherRankOne:
            return higher_rank_one_member(cone, v, rel_tol);
        case ConeClosedForm::Tag::CurrentAnnihilator: {
            const auto blocks = split_blocks(cone, v);
            if (blocks.empty()) return true;
            return annihilator_covector(blocks, rel_tol).has_value();
        }
    }
    return false;
}

Eigen::VectorXd CatalogEntry::sample_member(Rng& rng) const {
    switch (cone.tag) {
        case ConeClosedForm::Tag::RankOne: {
            const Eigen::VectorXd a = random_unit(rng, cone.ell);
            const Eigen::VectorXd xi = random_unit(rng, cone.d);
            return flatten_row_major(a * xi.transpose());
        }
        case ConeClosedForm::Tag::SymmetricRankOne: {
            const Eigen::VectorXd a = random_unit(rng, cone.d);
            const Eigen::VectorXd xi = random_unit(rng, cone.d);
            Eigen::MatrixXd m = 0.5 * (a * xi.transpose() + xi * a.transpose());
            Eigen::VectorXd v = sym_flatten(m);
            return v / v.norm();
        }
        case ConeClosedForm::Tag::RankAtMost: {
            Eigen::MatrixXd m(cone.d, cone.d);
            for (int r = 0; r < cone.d; ++r)
                for (int c = 0; c < cone.d; ++c) m(r, c) = rng.normal();
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
            Eigen::VectorXd sigma = svd.singularValues();
            for (Eigen::Index i = cone.max_rank; i < sigma.size(); ++i) sigma[i] = 0.0;
            const Eigen::MatrixXd lowrank =
                svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose();
            Eigen::VectorXd v = flatten_row_major(lowrank);
            return v / v.norm();
        }
        case ConeClosedForm::Tag::HigherRankOne: {
            const MultisetBasis basis(cone.d, cone.r);
            const Eigen::VectorXd a = random_unit(rng, cone.ell);
            const Eigen::VectorXd xi = random_unit(rng, cone.d);
            const Eigen::VectorXd power = sym_power_channels(basis, xi);
            Eigen::VectorXd v(cone.ell * basis.size());
            for (int k = 0; k < cone.ell; ++k) v.segment(k * basis.size(), basis.size()) = a[k] * power;
            return v / v.norm();
        }
        case ConeClosedForm::Tag::CurrentAnnihilator: {
            // Pick a kernel hyperplane, then random blocks built inside it.
            const Eigen::VectorXd omega = random_unit(rng, cone.d);
            // Orthonormal basis of Ker omega: trailing QR columns.
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(omega);
            const Eigen::MatrixXd q = qr.householderQ();
            const Eigen::MatrixXd kernel = q.rightCols(cone.d - 1);
            Eigen::VectorXd v(op.source_dim());
            int offset = 0;
            for (int deg : cone.degrees) {
                const int size = static_cast<int>(binomial(cone.d, deg));
                KVector block(cone.d, 0);
                if (deg <= cone.d - 1) {
                    // Random combination of deg-fold wedges of kernel vectors.
                    block = KVector(cone.d, deg);
                    for (int trial = 0; trial < 3; ++trial) {
                        KVector w(cone.d, 0, Eigen::VectorXd::Ones(1));
                        for (int j = 0; j < deg; ++j) {
                            Eigen::VectorXd x = Eigen::VectorXd::Zero(cone.d);
                            for (int b = 0; b < cone.d - 1; ++b) x += rng.normal() * kernel.col(b);
                            w = wedge(KVector(cone.d, 1, x), w);
                        }
                        block.coeffs += w.coeffs;
                    }
                } else {
                    block = KVector(cone.d, deg);  // degree d blocks must vanish
                }
                v.segment(offset, size) = block.coeffs;
                offset += size;
            }
            const double norm = v.norm();
            if (norm < 1e-12) return sample_member(rng);
            return v / norm;
        }
    }
    throw Error("unreachable");
}

namespace {

int pairs_count(int d) { return d * (d - 1) / 2; }

int pair_rank(int d, int i, int j) {
    // (0,1),(0,2),...,(0,d-1),(1,2),... for i < j
    return i * d - i * (i + 1) / 2 + (j - i - 1);
}

}  // namespace

CatalogEntry curl_annihilator(int d, int ell) {
    if (d < 2) throw DimensionError("curl annihilator needs d >= 2");
    if (ell < 1) throw DimensionError("curl annihilator needs ell >= 1");
    const int pairs = pairs_count(d);
    const int m = ell * d;
    const int n = ell * pairs;
    PdeOperator op(d, m, n, "curl_d" + std::to_string(d) + "_l" + std::to_string(ell));
    for (int k = 0; k < ell; ++k) {
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                const int row = k * pairs + pair_rank(d, i, j);
                Eigen::MatrixXd plus = Eigen::MatrixXd::Zero(n, m);
                plus(row, k * d + i) = 1.0;  // d_j mu^k_i
                op.add_term(MultiIndex::unit(d, j), plus);
                Eigen::MatrixXd minus = Eigen::MatrixXd::Zero(n, m);
                minus(row, k * d + j) = -1.0;  // - d_i mu^k_j
                op.add_term(MultiIndex::unit(d, i), minus);
            }
        }
    }
    ConeClosedForm cone;
    cone.tag = ConeClosedForm::Tag::RankOne;
    cone.d = d;
    cone.ell = ell;
    return CatalogEntry{"curl", std::move(op), cone,
                        "row-wise curl of R^{lxd}-valued measures; wave cone = rank-one "
                        "matrices (classical compensated compactness)"};
}

CatalogEntry higher_gradient_annihilator(int d, int ell, int r) {
    if (d < 2) throw DimensionError("higher-gradient annihilator needs d >= 2");
    if (ell < 1 || r < 1) throw DimensionError("needs ell >= 1 and r >= 1");
    const MultisetBasis values(d, r);
    const MultisetBasis rest(d, r - 1);
    const int pairs = pairs_count(d);
    const int m = ell * values.size();
    const int n = ell * rest.size() * pairs;
    PdeOperator op(d, m, n,
                   "higher_gradient_d" + std::to_string(d) + "_l" + std::to_string(ell) + "_r" +
                       std::to_string(r));
    // One equation per component k, residual multiset gamma, and pair i < j:
    // d_j mu^k_{i gamma} - d_i mu^k_{j gamma} = 0. Acting on symmetric values
    // this carries the full position-indexed family.
    for (int k = 0; k < ell; ++k) {
        for (int g = 0; g < rest.size(); ++g) {
            for (int i = 0; i < d; ++i) {
                for (int j = i + 1; j < d; ++j) {
                    const int row = (k * rest.size() + g) * pairs + pair_rank(d, i, j);
                    std::vector<int> with_i = rest.tuple(g);
                    with_i.push_back(i);
                    std::vector<int> with_j = rest.tuple(g);
                    with_j.push_back(j);
                    const int ci = values.index_of(with_i);
                    const int cj = values.index_of(with_j);
                    // Channel weights convert channel values back to entries.
                    Eigen::MatrixXd plus = Eigen::MatrixXd::Zero(n, m);
                    plus(row, k * values.size() + ci) =
                        1.0 / std::sqrt(static_cast<double>(values.multiplicity(ci)));
                    op.add_term(MultiIndex::unit(d, j), plus);
                    Eigen::MatrixXd minus = Eigen::MatrixXd::Zero(n, m);
                    minus(row, k * values.size() + cj) =
                        -1.0 / std::sqrt(static_cast<double>(values.multiplicity(cj)));
                    op.add_term(MultiIndex::unit(d, i), minus);
                }
            }
        }
    }
    ConeClosedForm cone;
    cone.tag = ConeClosedForm::Tag::HigherRankOne;
    cone.d = d;
    cone.ell = ell;
    cone.r = r;
    return CatalogEntry{"higher-gradient", std::move(op), cone,
                        "curl-type annihilator of r-th gradients; wave cone = symmetric "
                        "tensor powers a (x) xi^(x)r"};
}

CatalogEntry saint_venant(int d) {
    if (d < 2) throw DimensionError("Saint-Venant operator needs d >= 2");
    const int m = sym_channel_count(d);
    const int n = sym_channel_count(d);  // equations symmetric in (j,k); keep j <= k
    PdeOperator op(d, m, n, "saint_venant_d" + std::to_string(d));
    auto add = [&](int j, int k, int a, int b, int p, int q, double coef) {
        // coef * d_a d_b mu_{pq} contributing to equation (j,k)
        std::vector<int> alpha(static_cast<std::size_t>(d), 0);
        alpha[static_cast<std::size_t>(a)] += 1;
        alpha[static_cast<std::size_t>(b)] += 1;
        Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, m);
        mat(sym_pair_index(d, j, k), sym_pair_index(d, p, q)) = coef * sym_entry_weight(p, q);
        op.add_term(MultiIndex(alpha), mat);
    };
    for (int j = 0; j < d; ++j) {
        for (int k = j; k < d; ++k) {
            for (int i = 0; i < d; ++i) {
                add(j, k, i, k, i, j, 1.0);    // d_i d_k mu_ij
                add(j, k, i, j, i, k, 1.0);    // d_i d_j mu_ik
                add(j, k, j, k, i, i, -1.0);   // - d_j d_k mu_ii
                add(j, k, i, i, j, k, -1.0);   // - d_i d_i mu_jk
            }
        }
    }
    ConeClosedForm cone;
    cone.tag = ConeClosedForm::Tag::SymmetricRankOne;
    cone.d = d;
    cone.ell = d;
    return CatalogEntry{"saint-venant", std::move(op), cone,
                        "Saint-Venant compatibility conditions for symmetrized gradients; "
                        "symbol kernel = symmetrized dyads a (.) xi"};
}

CatalogEntry divergence_operator(int d) {
    if (d < 1) throw DimensionError("divergence needs d >= 1");
    const int m = d * d;
    const int n = d;
    PdeOperator op(d, m, n, "divergence_d" + std::to_string(d));
    for (int j = 0; j < d; ++j) {
        Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, m);
        for (int k = 0; k < d; ++k) mat(k, k * d + j) = 1.0;  // d_j mu^k_j
        op.add_term(MultiIndex::unit(d, j), mat);
    }
    ConeClosedForm cone;
    cone.tag = ConeClosedForm::Tag::RankAtMost;
    cone.d = d;
    cone.ell = d;
    cone.max_rank = d - 1;
    return CatalogEntry{"divergence", std::move(op), cone,
                        "row divergence of matrix-valued measures; wave cone = singular "
                        "matrices (rank <= d-1)"};
}

CatalogEntry current_boundary_operator(int d, const std::vector<int>& degrees) {
    if (degrees.empty()) throw EmptyFamily("current boundary operator needs >= 1 degree");
    for (int k : degrees)
        if (k < 1 || k > d) throw DimensionError("current degrees must lie in 1..d");
    int m = 0, n = 0;
    for (int k : degrees) {
        m += static_cast<int>(binomial(d, k));
        n += static_cast<int>(binomial(d, k - 1));
    }
    std::string label = "current_boundary_d" + std::to_string(d) + "_k";
    for (std::size_t i = 0; i < degrees.size(); ++i)
        label += (i ? "-" : "") + std::to_string(degrees[i]);
    PdeOperator op(d, m, n, label);
    // dT = -sum_i d_i T |_ dx^i blockwise over the tuple of currents.
    for (int axis = 0; axis < d; ++axis) {
        Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, m);
        int row = 0, col = 0;
        for (int k : degrees) {
            const Eigen::MatrixXd contraction = axis_contraction_matrix(d, k, axis);
            mat.block(row, col, contraction.rows(), contraction.cols()) = -contraction;
            row += static_cast<int>(contraction.rows());
            col += static_cast<int>(contraction.cols());
        }
        op.add_term(MultiIndex::unit(d, axis), mat);
    }
    ConeClosedForm cone;
    cone.tag = ConeClosedForm::Tag::CurrentAnnihilator;
    cone.d = d;
    cone.degrees = degrees;
    return CatalogEntry{"current-boundary", std::move(op), cone,
                        "boundary operator on tuples of normal currents; symbol = interior "
                        "product with omega_xi (Federer, multilinear algebra)"};
}

std::vector<CatalogEntry> default_catalog() {
    std::vector<CatalogEntry> entries;
    entries.push_back(curl_annihilator(2, 2));
    entries.push_back(higher_gradient_annihilator(2, 1, 2));
    entries.push_back(saint_venant(2));
    entries.push_back(divergence_operator(2));
    entries.push_back(current_boundary_operator(5, {2}));
    return entries;
}

}  // namespace wavecone
