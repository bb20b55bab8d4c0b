#include "wavecone/cone.hpp"

#include <algorithm>
#include <cmath>

namespace wavecone {

namespace {

// Cached list of top-order terms, so the sampling loop avoids re-walking the
// term map for every frequency.
struct PrincipalEvaluator {
    int k = 0;
    double two_pi_pow_k = 1.0;
    std::vector<std::pair<MultiIndex, Eigen::MatrixXd>> top_terms;
    int n = 0, m = 0;

    explicit PrincipalEvaluator(const PdeOperator& op)
        : k(op.order()), n(op.target_dim()), m(op.source_dim()) {
        two_pi_pow_k = std::abs(two_pi_i_pow(k));
        for (const auto& [alpha, coeff] : op.terms()) {
            if (alpha.order() == k && !coeff.isZero(0.0)) top_terms.emplace_back(alpha, coeff);
        }
    }

    Eigen::MatrixXd polynomial(const Eigen::VectorXd& xi) const {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, m);
        for (const auto& [alpha, coeff] : top_terms) s += monomial(xi, alpha) * coeff;
        return s;
    }

    /// |A^k(xi) v| including the (2 pi)^k modulus.
    double symbol_norm(const Eigen::VectorXd& xi, const Eigen::VectorXd& v) const {
        return two_pi_pow_k * (polynomial(xi) * v).norm();
    }
};

}  // namespace

std::vector<Eigen::VectorXd> kernel_basis(const PdeOperator& op, const Eigen::VectorXd& xi,
                                          double rel_tol) {
    if (xi.size() != op.dimension()) throw DimensionError("xi must have length d");
    if (xi.norm() <= 0.0) throw DegenerateFrequency("kernel_basis needs a nonzero frequency");

    const Eigen::MatrixXd poly = op.principal_polynomial(xi);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(poly, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;

    std::vector<Eigen::VectorXd> basis;
    const int m = op.source_dim();
    if (sigma_max <= 0.0) {
        for (int i = 0; i < m; ++i) basis.push_back(Eigen::VectorXd::Unit(m, i));
        return basis;
    }
    const Eigen::MatrixXd v_mat = svd.matrixV();
    for (int i = 0; i < m; ++i) {
        const double s = i < sigma.size() ? sigma(i) : 0.0;
        if (s <= rel_tol * sigma_max) basis.push_back(v_mat.col(i));
    }
    return basis;
}

ConeVerdict in_wave_cone(const PdeOperator& op, const Eigen::VectorXd& v, double tol,
                         const SphereSampling& sampling) {
    if (v.size() != op.source_dim()) throw DimensionError("v must have length m");
    const double v_norm = v.norm();
    if (v_norm <= 0.0) throw DegenerateVector("in_wave_cone needs a nonzero vector");

    const PrincipalEvaluator eval(op);
    const Eigen::VectorXd unit_v = v / v_norm;
    const auto objective = [&](const Eigen::VectorXd& xi) { return eval.symbol_norm(xi, unit_v); };

    ConeVerdict verdict;
    const auto samples = sphere_samples(op.dimension(), sampling);
    verdict.samples_used = static_cast<int>(samples.size());

    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_xi = samples.front();
    for (const auto& xi : samples) {
        const double value = objective(xi);
        if (sphere_min_less(value, xi, best, best_xi)) {
            best = value;
            best_xi = xi;
        }
    }

    if (sampling.refine_steps > 0) {
        best_xi = refine_on_sphere(objective, best_xi, best, sampling);
        verdict.refined = true;
    }

    verdict.residual = best;
    verdict.min_symbol_norm = best * v_norm;
    verdict.member = best <= tol;
    if (verdict.member) verdict.witness_xi = best_xi / best_xi.norm();
    return verdict;
}

namespace {

int numerical_rank(const Eigen::MatrixXd& a, double rel_tol, double sigma_ref) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sigma = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > rel_tol * sigma_ref) ++rank;
    }
    return rank;
}

double singular_value(const Eigen::MatrixXd& a, int index_from_largest) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sigma = svd.singularValues();
    if (index_from_largest < 0 || index_from_largest >= sigma.size()) return 0.0;
    return sigma(index_from_largest);
}

}  // namespace

RankProfile constant_rank_check(const PdeOperator& op, const SphereSampling& sampling,
                                double rel_tol) {
    if (op.order() < 1) throw UnsupportedOrderZero("constant_rank_check needs order >= 1");
    const PrincipalEvaluator eval(op);
    const auto samples = sphere_samples(op.dimension(), sampling);

    // Global scale reference: largest singular value seen anywhere on the
    // sphere. Using a per-point sigma_max would mask points where the whole
    // symbol vanishes.
    double sigma_ref = 0.0;
    std::vector<Eigen::MatrixXd> polys;
    polys.reserve(samples.size());
    for (const auto& xi : samples) {
        polys.push_back(eval.polynomial(xi));
        sigma_ref = std::max(sigma_ref, singular_value(polys.back(), 0));
    }
    if (sigma_ref <= 0.0) {
        RankProfile flat;
        flat.min_rank = flat.max_rank = 0;
        return flat;
    }

    RankProfile profile;
    profile.min_rank = std::numeric_limits<int>::max();
    profile.max_rank = 0;
    Eigen::VectorXd xi_min, xi_max;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const int rank = numerical_rank(polys[i], rel_tol, sigma_ref);
        if (rank < profile.min_rank) {
            profile.min_rank = rank;
            xi_min = samples[i];
        }
        if (rank > profile.max_rank) {
            profile.max_rank = rank;
            xi_max = samples[i];
        }
    }

    if (profile.min_rank < profile.max_rank) {
        profile.violation_pair = std::make_pair(xi_min, xi_max);
        return profile;
    }

    // All sampled ranks agree. A rank drop can still hide on a measure-zero
    // set; chase the smallest retained singular value downhill and see if it
    // crosses the cutoff.
    const int generic_rank = profile.min_rank;
    if (generic_rank == 0) return profile;
    const auto smallest_retained = [&](const Eigen::VectorXd& xi) {
        return singular_value(eval.polynomial(xi), generic_rank - 1);
    };

    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd start = samples.front();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double value = smallest_retained(samples[i]);
        if (sphere_min_less(value, samples[i], best, start)) {
            best = value;
            start = samples[i];
        }
    }
    const Eigen::VectorXd drop_xi = refine_on_sphere(smallest_retained, start, best, sampling);
    if (best <= rel_tol * sigma_ref) {
        profile.min_rank = numerical_rank(eval.polynomial(drop_xi), rel_tol, sigma_ref);
        profile.violation_pair = std::make_pair(drop_xi, xi_max.size() ? xi_max : samples.front());
    }
    return profile;
}

std::vector<ConeProfileEntry> cone_distance_profile(const PdeOperator& op,
                                                    const Eigen::VectorXd& v,
                                                    const SphereSampling& sampling) {
    if (v.size() != op.source_dim()) throw DimensionError("v must have length m");
    const double v_norm = v.norm();
    if (v_norm <= 0.0) throw DegenerateVector("cone_distance_profile needs a nonzero vector");

    const PrincipalEvaluator eval(op);
    std::vector<ConeProfileEntry> table;
    for (const auto& xi : sphere_samples(op.dimension(), sampling)) {
        const double raw = eval.symbol_norm(xi, v);
        table.push_back({xi, raw / v_norm, raw});
    }
    std::sort(table.begin(), table.end(), [](const ConeProfileEntry& a, const ConeProfileEntry& b) {
        return sphere_min_less(a.residual, a.xi, b.residual, b.xi);
    });
    return table;
}

}  // namespace wavecone
