#pragma once

#include <string>
#include <vector>

#include "wavecone/cone.hpp"
#include "wavecone/exterior.hpp"
#include "wavecone/pde_operator.hpp"
#include "wavecone/rng.hpp"
#include "wavecone/sym_basis.hpp"

namespace wavecone {

/// Closed-form description of a catalog operator's wave cone, with a direct
/// membership predicate used to cross-validate the generic sampled test.
struct ConeClosedForm {
    enum class Tag {
        RankOne,            // {a (x) xi}, values in R^{ell x d}
        SymmetricRankOne,   // {a (.) xi}, symmetric d x d values
        RankAtMost,         // {rank <= max_rank}, values in R^{d x d}
        HigherRankOne,      // {a (x) xi^{(x) r}}, symmetric r-linear values
        CurrentAnnihilator  // tuples annihilated by a common 1-covector
    };

    Tag tag = Tag::RankOne;
    int d = 0;
    int ell = 1;
    int r = 1;
    int max_rank = 0;
    std::vector<int> degrees;  // CurrentAnnihilator block degrees

    std::string describe() const;
};

struct CatalogEntry {
    std::string name;
    PdeOperator op;
    ConeClosedForm cone;
    std::string citation;

    /// Closed-form membership of a value vector (same channel layout as op).
    bool closed_form_member(const Eigen::VectorXd& v, double rel_tol = 1e-6) const;

    /// Random vector lying in the closed-form cone (unit norm).
    Eigen::VectorXd sample_member(Rng& rng) const;
};

/// Annihilator of gradients: one equation d_j mu^k_i - d_i mu^k_j per
/// component k and unordered axis pair i < j. Wave cone {a (x) xi}.
CatalogEntry curl_annihilator(int d, int ell);

/// Annihilator of r-th order gradients on symmetric r-linear-map-valued
/// measures; wave cone {a (x) xi (x) ... (x) xi}. r = 1 reduces to the curl.
CatalogEntry higher_gradient_annihilator(int d, int ell, int r);

/// Saint-Venant compatibility operator on symmetric-matrix-valued measures;
/// principal symbol kernel {a (.) xi}.
CatalogEntry saint_venant(int d);

/// Row divergence on matrix-valued measures; wave cone {rank <= d-1}.
CatalogEntry divergence_operator(int d);

/// Boundary operator (dT_1, ..., dT_r) on tuples of k_i-vector-valued
/// measures; symbol acts as -2 pi i (v_i |_ omega_xi)_i and the kernel test
/// delegates to the exterior algebra.
CatalogEntry current_boundary_operator(int d, const std::vector<int>& degrees);

/// The catalog shown by the CLI: one representative entry per family.
std::vector<CatalogEntry> default_catalog();

}  // namespace wavecone
