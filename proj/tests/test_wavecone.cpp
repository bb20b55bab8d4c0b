#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "test_helpers.hpp"
#include "wavecone/catalog.hpp"
#include "wavecone/cone.hpp"

using namespace wavecone;
using namespace wavecone::testing;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("scalar curl kernel at xi = e2 is the xi line") {
    const PdeOperator op = scalar_curl_2d();
    Eigen::VectorXd xi(2);
    xi << 0.0, 1.0;
    const auto basis = kernel_basis(op, xi);
    REQUIRE(basis.size() == 1);
    // kernel = span{xi}: component along e1 vanishes
    CHECK(std::abs(basis[0][0]) < 1e-12);
    CHECK(std::abs(std::abs(basis[0][1]) - 1.0) < 1e-12);
}

TEST_CASE("Saint-Venant kernel at e1 is spanned by e1(x)e1 and e1(.)e2") {
    const PdeOperator op = saint_venant(2).op;
    Eigen::VectorXd xi(2);
    xi << 1.0, 0.0;
    const auto basis = kernel_basis(op, xi);
    REQUIRE(basis.size() == 2);
    Eigen::MatrixXd span(3, 2);
    span.col(0) = basis[0];
    span.col(1) = basis[1];
    // Both target vectors must lie in the span.
    Eigen::VectorXd e11 = sym_flatten((Eigen::MatrixXd(2, 2) << 1, 0, 0, 0).finished());
    Eigen::MatrixXd e12m(2, 2);
    e12m << 0, 0.5, 0.5, 0;
    Eigen::VectorXd e12 = sym_flatten(e12m);
    for (const Eigen::VectorXd& target : {e11, e12}) {
        const Eigen::VectorXd coeffs = span.colPivHouseholderQr().solve(target);
        CHECK((span * coeffs - target).norm() < 1e-10);
    }
}

TEST_CASE("identity block has trivial kernel") {
    PdeOperator op(2, 2, 2, "mass");
    op.add_term(MultiIndex({0, 0}), Eigen::MatrixXd::Identity(2, 2));
    Eigen::VectorXd xi(2);
    xi << 0.3, 0.7;
    CHECK(kernel_basis(op, xi).empty());
}

TEST_CASE("kernel_basis rejects the zero frequency") {
    CHECK_THROWS_AS(kernel_basis(scalar_curl_2d(), Eigen::VectorXd::Zero(2)),
                    DegenerateFrequency);
}

TEST_CASE("rank-one matrices are curl members with witness parallel to b") {
    const CatalogEntry curl = curl_annihilator(3, 3);
    Rng rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd a = random_unit_vector(rng, 3);
        const Eigen::VectorXd b = random_unit_vector(rng, 3);
        const Eigen::VectorXd v = flatten_row_major(a * b.transpose());
        const ConeVerdict verdict = in_wave_cone(curl.op, v, 1e-6);
        CHECK(verdict.member);
        CHECK(verdict.residual <= 1e-8);
        REQUIRE(verdict.witness_xi.has_value());
        CHECK(std::abs(std::abs(verdict.witness_xi->dot(b)) - 1.0) < 1e-6);
    }
}

TEST_CASE("identity is not in the divergence cone; minimum is 2 pi") {
    const PdeOperator div2 = divergence_operator(2).op;
    Eigen::VectorXd id(4);
    id << 1, 0, 0, 1;
    const ConeVerdict verdict = in_wave_cone(div2, id, 1e-6);
    CHECK_FALSE(verdict.member);
    // |A(xi) I| = 2 pi |xi| is constant on the sphere; the normalized residual
    // divides by |I|_F = sqrt(2).
    CHECK(verdict.min_symbol_norm == doctest::Approx(kTwoPi).epsilon(1e-9));
    CHECK(verdict.residual == doctest::Approx(kTwoPi / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("kernel basis vectors are members by construction") {
    const PdeOperator op = saint_venant(2).op;
    Eigen::VectorXd xi(2);
    xi << 0.6, -0.8;
    for (const auto& v : kernel_basis(op, xi)) {
        const ConeVerdict verdict = in_wave_cone(op, v, 1e-6);
        CHECK(verdict.member);
        CHECK(verdict.residual <= 1e-9);
    }
}

TEST_CASE("membership verdicts are scale invariant") {
    const PdeOperator div2 = divergence_operator(2).op;
    Rng rng(55);
    for (double t : {2.0, -3.5, 1e-4, 1e6}) {
        const Eigen::MatrixXd m = random_matrix(rng, 2, 2);
        const Eigen::VectorXd v = flatten_row_major(m);
        const ConeVerdict base = in_wave_cone(div2, v, 1e-6);
        const ConeVerdict scaled = in_wave_cone(div2, t * v, 1e-6);
        CHECK(base.member == scaled.member);
        CHECK(std::abs(base.residual - scaled.residual) <= 1e-12 * (1.0 + base.residual));
        if (base.member) {
            CHECK((*base.witness_xi - *scaled.witness_xi).norm() <= 1e-12);
        }
    }
}

TEST_CASE("witness is sound under independent re-evaluation") {
    const CatalogEntry curl = curl_annihilator(2, 2);
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd v = curl.sample_member(rng);
        const double tol = 1e-6;
        const ConeVerdict verdict = in_wave_cone(curl.op, v, tol);
        REQUIRE(verdict.member);
        REQUIRE(verdict.witness_xi.has_value());
        CHECK(std::abs(verdict.witness_xi->norm() - 1.0) <= 1e-12);
        const double check =
            (curl.op.principal_symbol(*verdict.witness_xi) * v.cast<std::complex<double>>())
                .norm();
        CHECK(check <= tol * v.norm());
    }
}

TEST_CASE("members stay members after rhs augmentation") {
    const CatalogEntry curl = curl_annihilator(2, 1);
    const PdeOperator aug = augment_with_rhs(curl.op);
    Rng rng(91);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd v = curl.sample_member(rng);
        REQUIRE(in_wave_cone(curl.op, v, 1e-6).member);
        Eigen::VectorXd wide(aug.source_dim());
        wide.head(v.size()) = v;
        wide.tail(curl.op.target_dim()) = random_unit_vector(rng, curl.op.target_dim());
        CHECK(in_wave_cone(aug, wide, 1e-6).member);
    }
}

TEST_CASE("equal sampling settings give bit-identical verdicts") {
    const PdeOperator op = divergence_operator(2).op;
    Rng rng(13);
    const Eigen::VectorXd v = flatten_row_major(random_matrix(rng, 2, 2));
    SphereSampling sampling;
    sampling.seed = 42;
    const ConeVerdict a = in_wave_cone(op, v, 1e-6, sampling);
    const ConeVerdict b = in_wave_cone(op, v, 1e-6, sampling);
    CHECK(a.member == b.member);
    CHECK(a.residual == b.residual);  // bitwise
    CHECK(a.min_symbol_norm == b.min_symbol_norm);
    CHECK(a.samples_used == b.samples_used);
}

TEST_CASE("degenerate inputs are rejected") {
    const PdeOperator op = divergence_operator(2).op;
    CHECK_THROWS_AS(in_wave_cone(op, Eigen::VectorXd::Zero(4), 1e-6), DegenerateVector);
    CHECK_THROWS_AS(cone_distance_profile(op, Eigen::VectorXd::Zero(4)), DegenerateVector);
}

TEST_CASE("constant rank: curl has rank l*(d-1), divergence rank d") {
    SphereSampling sampling;
    sampling.count = 512;
    const RankProfile curl_profile = constant_rank_check(curl_annihilator(2, 1).op, sampling);
    CHECK(curl_profile.constant_rank());
    CHECK(curl_profile.min_rank == 1);
    CHECK_FALSE(curl_profile.violation_pair.has_value());

    const RankProfile div_profile = constant_rank_check(divergence_operator(3).op, sampling);
    CHECK(div_profile.constant_rank());
    CHECK(div_profile.min_rank == 3);
}

TEST_CASE("d1 on scalars violates constant rank with a witness pair") {
    SphereSampling sampling;
    sampling.count = 512;
    const RankProfile profile = constant_rank_check(d1_on_scalars_2d(), sampling);
    CHECK_FALSE(profile.constant_rank());
    CHECK(profile.min_rank == 0);
    CHECK(profile.max_rank == 1);
    REQUIRE(profile.violation_pair.has_value());
    const auto& [drop, generic] = *profile.violation_pair;
    CHECK(std::abs(drop[0]) < 1e-7);  // the symbol 2 pi i xi_1 vanishes here
    CHECK(std::abs(generic[0]) > 1e-7);
}

TEST_CASE("cone distance profile is sorted and flat for the identity") {
    const PdeOperator div2 = divergence_operator(2).op;
    Eigen::VectorXd id(4);
    id << 1, 0, 0, 1;
    SphereSampling sampling;
    sampling.count = 256;
    const auto table = cone_distance_profile(div2, id, sampling);
    REQUIRE(table.size() == 256);
    for (std::size_t i = 0; i + 1 < table.size(); ++i)
        CHECK(table[i].residual <= table[i + 1].residual + 1e-15);
    for (const auto& entry : table)
        CHECK(entry.symbol_norm == doctest::Approx(kTwoPi).epsilon(1e-9));
}

TEST_CASE("profile minimum matches membership for member vectors") {
    const CatalogEntry curl = curl_annihilator(2, 1);
    Rng rng(19);
    const Eigen::VectorXd v = curl.sample_member(rng);
    const auto table = cone_distance_profile(curl.op, v);
    const ConeVerdict verdict = in_wave_cone(curl.op, v, 1e-6);
    CHECK(verdict.member);
    CHECK(table.front().residual >= verdict.residual);  // refinement only improves
}

TEST_CASE("rank-2 diagonal matrix has a positive curl landscape") {
    const CatalogEntry curl = curl_annihilator(2, 2);
    Eigen::VectorXd diag(4);
    diag << 1, 0, 0, 1;  // diag(1,1) as a 2x2 matrix
    const auto table = cone_distance_profile(curl.op, diag);
    CHECK(table.front().residual > 0.1);
}

TEST_CASE("sampled+refined membership agrees with a dense circle sweep") {
    // d = 2 oracle: 200k-point uniform sweep (the acceptance suite runs 1e6).
    const double tol = 1e-6;
    Rng rng(333);
    struct Case {
        PdeOperator op;
        Eigen::VectorXd v;
    };
    std::vector<Case> cases;
    const CatalogEntry curl = curl_annihilator(2, 2);
    const CatalogEntry div2 = divergence_operator(2);
    const CatalogEntry sv = saint_venant(2);
    for (int i = 0; i < 4; ++i) {
        cases.push_back({curl.op, curl.sample_member(rng)});
        cases.push_back({div2.op, div2.sample_member(rng)});
        cases.push_back({sv.op, sv.sample_member(rng)});
    }
    Eigen::VectorXd id(4);
    id << 1, 0, 0, 1;
    cases.push_back({div2.op, id});
    cases.push_back({curl.op, flatten_row_major(random_matrix(rng, 2, 2))});
    for (const auto& test_case : cases) {
        const ConeVerdict verdict = in_wave_cone(test_case.op, test_case.v, tol);
        const double sweep = circle_sweep_min(test_case.op, test_case.v, 200000);
        CHECK(verdict.member == (sweep / test_case.v.norm() <= tol));
    }
}
