#pragma once

#include <optional>
#include <string>

#include "wavecone/cone.hpp"
#include "wavecone/grid_measure.hpp"

namespace wavecone {

struct VerifyParams {
    double density_threshold = 10.0;
    double mass_floor = 1e-9;
    double cone_tol = 1e-4;
    SphereSampling sampling;
    int afree_tests = 20;
    std::uint64_t seed = 0;
    std::string per_cell_csv;  // optional output path
    int threads = 1;
};

/// End-to-end check of the structure prediction on one measure: decompose,
/// take the polar of the singular part, and test every singular cell's polar
/// for wave-cone membership, aggregating by singular mass.
struct VerificationReport {
    std::string operator_label;
    double afree_residual = 0.0;
    double afree_gate = 0.0;  // declared gate, 10 * max cell size
    bool afree_gate_passed = false;
    double total_mass = 0.0;
    double singular_mass = 0.0;
    double ac_mass = 0.0;
    std::optional<double> mass_fraction_in_cone;  // absent when no singular mass
    double worst_polar_residual = 0.0;
    long long singular_cells = 0;
    long long distinct_polars = 0;
    std::string per_cell_csv;

    std::string to_text() const;
    std::string to_json() const;
};

VerificationReport verify_polar_in_cone(const PdeOperator& op, const GridMeasure& mu,
                                        const VerifyParams& params = {});

}  // namespace wavecone
