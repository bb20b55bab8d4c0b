#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "test_helpers.hpp"
#include "wavecone/catalog.hpp"
#include "wavecone/cone.hpp"
#include "wavecone/pde_operator.hpp"

using namespace wavecone;
using namespace wavecone::testing;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("multi-index basics") {
    MultiIndex alpha({1, 0, 2});
    CHECK(alpha.order() == 3);
    CHECK(alpha.dimension() == 3);
    CHECK(MultiIndex({1, 0, 2}) == alpha);
    CHECK(MultiIndex({0, 1, 2}) < alpha);
    CHECK_THROWS_AS(MultiIndex({-1, 0}), DimensionError);
}

TEST_CASE("order of single-term operator") {
    PdeOperator op(2, 1, 1);
    Eigen::MatrixXd a(1, 1);
    a << 2.0;
    op.add_term(MultiIndex({1, 0}), a);
    CHECK(op.order() == 1);
}

TEST_CASE("order ignores zero matrices") {
    PdeOperator op(2, 1, 1);
    Eigen::MatrixXd a0(1, 1), a1(1, 1);
    a0 << 3.0;
    a1 << 0.0;
    op.add_term(MultiIndex({0, 0}), a0);
    op.add_term(MultiIndex({1, 0}), a1);
    CHECK(op.order() == 0);
}

TEST_CASE("order of Saint-Venant operator is 2") {
    CHECK(saint_venant(2).op.order() == 2);
}

TEST_CASE("all-zero operator has no order") {
    PdeOperator op(2, 1, 1);
    op.add_term(MultiIndex({1, 0}), Eigen::MatrixXd::Zero(1, 1));
    CHECK_THROWS_AS(op.order(), OperatorIsZero);
}

TEST_CASE("scalar curl full symbol at (1,0)") {
    const PdeOperator op = scalar_curl_2d();
    Eigen::VectorXd xi(2);
    xi << 1.0, 0.0;
    const Eigen::MatrixXcd s = op.full_symbol(xi);
    REQUIRE(s.rows() == 1);
    REQUIRE(s.cols() == 2);
    CHECK(std::abs(s(0, 0)) < 1e-15);
    CHECK(std::abs(s(0, 1) - std::complex<double>(0.0, kTwoPi)) < 1e-12);
}

TEST_CASE("divergence symbol acts as M -> 2 pi i M xi") {
    const PdeOperator op = divergence_operator(2).op;
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd m = random_matrix(rng, 2, 2);
        const Eigen::VectorXd xi = random_unit_vector(rng, 2);
        const Eigen::VectorXcd out =
            op.full_symbol(xi) * flatten_row_major(m).cast<std::complex<double>>();
        const Eigen::VectorXd expected = m * xi;
        for (int i = 0; i < 2; ++i) {
            CHECK(std::abs(out[i] - std::complex<double>(0.0, kTwoPi) * expected[i]) < 1e-12);
        }
    }
    // e1 (x) e1 maps to 2 pi i e1 at xi = (1,0)
    Eigen::VectorXd e11(4);
    e11 << 1, 0, 0, 0;
    Eigen::VectorXd xi(2);
    xi << 1.0, 0.0;
    const Eigen::VectorXcd out = op.full_symbol(xi) * e11.cast<std::complex<double>>();
    CHECK(std::abs(out[0] - std::complex<double>(0.0, kTwoPi)) < 1e-12);
    CHECK(std::abs(out[1]) < 1e-15);
}

TEST_CASE("zero operator gives zero symbol matrix") {
    PdeOperator op(2, 3, 2);
    Eigen::VectorXd xi(2);
    xi << 0.3, -1.2;
    CHECK(op.full_symbol(xi).norm() == 0.0);
}

TEST_CASE("principal symbol equals full symbol for homogeneous first order") {
    const PdeOperator op = scalar_curl_2d();
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd xi = random_unit_vector(rng, 2);
        CHECK((op.full_symbol(xi) - op.principal_symbol(xi)).norm() < 1e-14);
    }
}

TEST_CASE("lower-order terms do not move the principal symbol") {
    PdeOperator op = scalar_curl_2d();
    Eigen::MatrixXd a0(1, 2);
    a0 << 5.0, -7.0;
    op.add_term(MultiIndex({0, 0}), a0);
    const PdeOperator plain = scalar_curl_2d();
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd xi = random_unit_vector(rng, 2);
        CHECK((op.principal_symbol(xi) - plain.principal_symbol(xi)).norm() < 1e-14);
        CHECK((op.full_symbol(xi) - plain.full_symbol(xi)).norm() > 1.0);
    }
}

TEST_CASE("Saint-Venant symbol matches the closed form on symmetric matrices") {
    // -(4 pi)^{-2} A(xi) M = (M xi) (x) xi + xi (x) (M xi) - tr(M) xi (x) xi - |xi|^2 M
    const PdeOperator op = saint_venant(2).op;
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::MatrixXd m = random_matrix(rng, 2, 2);
        m = 0.5 * (m + m.transpose()).eval();
        const Eigen::VectorXd xi = 2.0 * random_unit_vector(rng, 2);
        const Eigen::VectorXcd lhs_c = op.full_symbol(xi) * sym_flatten(m).cast<std::complex<double>>();
        // The second-order symbol is real times (2 pi i)^2 = -(2 pi)^2.
        Eigen::VectorXd lhs(lhs_c.size());
        for (int i = 0; i < lhs.size(); ++i) {
            CHECK(std::abs(lhs_c[i].imag()) < 1e-10);
            lhs[i] = -lhs_c[i].real() / (4.0 * std::numbers::pi * std::numbers::pi);
        }
        const Eigen::VectorXd mxi = m * xi;
        const Eigen::MatrixXd expected = mxi * xi.transpose() + xi * mxi.transpose() -
                                         m.trace() * xi * xi.transpose() -
                                         xi.squaredNorm() * m;
        const Eigen::VectorXd rhs = sym_flatten(expected);
        CHECK((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
    }
}

TEST_CASE("homogeneity of the principal symbol") {
    Rng rng(5);
    const std::vector<PdeOperator> ops = {scalar_curl_2d(), saint_venant(2).op,
                                          divergence_operator(3).op};
    for (const auto& op : ops) {
        const int k = op.order();
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::VectorXd xi = random_unit_vector(rng, op.dimension());
            const double t = rng.uniform(0.1, 4.0);
            const Eigen::MatrixXcd scaled = op.principal_symbol(t * xi);
            const Eigen::MatrixXcd reference = std::pow(t, k) * op.principal_symbol(xi);
            CHECK((scaled - reference).norm() <= 1e-12 * (1.0 + reference.norm()));
        }
    }
}

TEST_CASE("symbol is additive in the operator") {
    const PdeOperator a = scalar_curl_2d();
    PdeOperator b(2, 2, 1, "other");
    Eigen::MatrixXd mat(1, 2);
    mat << 2.0, -3.0;
    b.add_term(MultiIndex({0, 1}), mat);
    const PdeOperator sum = a + b;
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd xi = random_unit_vector(rng, 2);
        CHECK((sum.full_symbol(xi) - a.full_symbol(xi) - b.full_symbol(xi)).norm() < 1e-13);
    }
}

TEST_CASE("full minus principal has polynomial degree <= k-1") {
    // Sample k+2 scalings and fit a degree k-1 polynomial per entry; the
    // residual of the exact fit stays at round-off.
    PdeOperator op = saint_venant(2).op;
    Eigen::MatrixXd low = Eigen::MatrixXd::Zero(op.target_dim(), op.source_dim());
    low(0, 0) = 1.5;
    op.add_term(MultiIndex({1, 0}), low);
    op.add_term(MultiIndex({0, 0}), 0.25 * Eigen::MatrixXd::Ones(op.target_dim(), op.source_dim()));
    const int k = op.order();
    REQUIRE(k == 2);
    Rng rng(29);
    const Eigen::VectorXd xi = random_unit_vector(rng, 2);
    const int samples = k + 2;
    Eigen::MatrixXd vandermonde(samples, k);  // degrees 0..k-1
    std::vector<Eigen::MatrixXcd> diffs;
    for (int s = 0; s < samples; ++s) {
        const double t = 0.5 + s;
        for (int deg = 0; deg < k; ++deg) vandermonde(s, deg) = std::pow(t, deg);
        diffs.push_back(op.full_symbol(t * xi) - op.principal_symbol(t * xi));
    }
    for (int r = 0; r < op.target_dim(); ++r) {
        for (int c = 0; c < op.source_dim(); ++c) {
            Eigen::VectorXd rhs(samples);
            for (int s = 0; s < samples; ++s) rhs[s] = diffs[static_cast<std::size_t>(s)](r, c).imag();
            const Eigen::VectorXd coef =
                vandermonde.colPivHouseholderQr().solve(rhs);
            CHECK((vandermonde * coef - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }
    }
}

TEST_CASE("conjugation symmetry for real coefficients") {
    const PdeOperator op = saint_venant(2).op;
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd xi = 1.7 * random_unit_vector(rng, 2);
        const Eigen::MatrixXcd plus = op.full_symbol(xi);
        const Eigen::MatrixXcd minus = op.full_symbol(-xi);
        CHECK((minus - plus.conjugate()).norm() < 1e-12 * (1.0 + plus.norm()));
    }
}

TEST_CASE("augment_with_rhs widens the source and keeps the kernel structure") {
    const PdeOperator div2 = divergence_operator(2).op;
    const PdeOperator aug = augment_with_rhs(div2);
    CHECK(aug.source_dim() == div2.source_dim() + div2.target_dim());
    CHECK(aug.target_dim() == div2.target_dim());
    CHECK(aug.order() == div2.order());

    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd xi = random_unit_vector(rng, 2);
        const auto base = kernel_basis(div2, xi);
        const auto wide = kernel_basis(aug, xi);
        CHECK(wide.size() == base.size() + 2);  // kernel gains the R^n factor
    }

    // Augmenting twice stacks two factors.
    const PdeOperator aug2 = augment_with_rhs(aug);
    CHECK(aug2.source_dim() == div2.source_dim() + 2 * div2.target_dim());
    Eigen::VectorXd xi(2);
    xi << 0.6, -0.8;
    CHECK(kernel_basis(aug2, xi).size() == kernel_basis(div2, xi).size() + 4);
}

TEST_CASE("augmenting an order-zero operator is rejected") {
    PdeOperator op(2, 2, 2, "mass");
    op.add_term(MultiIndex({0, 0}), Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(augment_with_rhs(op), UnsupportedOrderZero);
}

TEST_CASE("operator spec JSON round-trips byte-identically") {
    const CatalogEntry entry = saint_venant(2);
    const std::string first = to_spec_json(entry.op);
    const PdeOperator parsed = from_spec_json(first);
    const std::string second = to_spec_json(parsed);
    CHECK(first == second);
    CHECK(parsed.label() == entry.op.label());
    CHECK(parsed.terms().size() == entry.op.terms().size());

    // Insertion order must not matter: rebuild with terms reversed.
    PdeOperator reversed(entry.op.dimension(), entry.op.source_dim(), entry.op.target_dim(),
                         entry.op.label());
    std::vector<std::pair<MultiIndex, Eigen::MatrixXd>> terms(entry.op.terms().begin(),
                                                              entry.op.terms().end());
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) reversed.add_term(it->first, it->second);
    CHECK(to_spec_json(reversed) == first);
}

TEST_CASE("malformed spec JSON raises ParseError") {
    CHECK_THROWS_AS(from_spec_json("{"), ParseError);
    CHECK_THROWS_AS(from_spec_json(R"({"label":"x","d":2,"m":2,"n":1,"terms":[{"alpha":[1,0],"matrix":[[1.0]]}]})"),
                    ParseError);
}

TEST_CASE("dimension mismatches are rejected") {
    PdeOperator op(2, 2, 1);
    CHECK_THROWS_AS(op.add_term(MultiIndex({1}), Eigen::MatrixXd::Zero(1, 2)), DimensionError);
    CHECK_THROWS_AS(op.add_term(MultiIndex({1, 0}), Eigen::MatrixXd::Zero(2, 2)), DimensionError);
    op.add_term(MultiIndex({1, 0}), Eigen::MatrixXd::Ones(1, 2));
    Eigen::VectorXd bad(3);
    bad << 1, 2, 3;
    CHECK_THROWS_AS(op.full_symbol(bad), DimensionError);
}
