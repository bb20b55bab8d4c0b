#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavecone/errors.hpp"
#include "wavecone/pde_operator.hpp"
#include "wavecone/rng.hpp"

namespace wavecone {

/// Uniform box grid shared by the measure generators.
struct GridParams {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    int cells = 128;  // per axis
    bool periodic = false;

    static GridParams unit_box(int d, int cells, bool periodic = false);
};

/// R^m-valued measure discretized on a uniform box grid. Cell values are the
/// measure of the cell, mu(cell), not densities, so singular objects keep a
/// grid-independent total mass.
class GridMeasure {
public:
    GridMeasure() = default;
    GridMeasure(int d, int m, GridParams grid);

    int dimension() const { return d_; }
    int channels() const { return m_; }
    int cells_per_axis() const { return grid_.cells; }
    bool periodic() const { return grid_.periodic; }
    const GridParams& grid() const { return grid_; }

    long long cell_count() const;
    double cell_size(int axis) const;  // uniform per axis
    double cell_volume() const;
    double box_volume() const;

    long long flat_index(const std::vector<int>& idx) const;
    std::vector<int> cell_coords(long long flat) const;
    Eigen::VectorXd cell_center(long long flat) const;

    Eigen::Map<Eigen::VectorXd> value(long long cell);
    Eigen::Map<const Eigen::VectorXd> value(long long cell) const;

    double cell_mass(long long cell) const { return value(cell).norm(); }
    double total_variation() const;

    std::vector<double>& raw_values() { return values_; }
    const std::vector<double>& raw_values() const { return values_; }

private:
    int d_ = 0, m_ = 0;
    GridParams grid_;
    std::vector<double> values_;
};

/// Binary format GMES1: magic, u32 d/m/cells/periodic, f64 box bounds,
/// f64 values row-major. Little-endian.
void save_grid_measure(const GridMeasure& mu, const std::string& path);
GridMeasure load_grid_measure(const std::string& path);

/// CSV export: one row per cell (indices, center, channels).
void write_grid_measure_csv(const GridMeasure& mu, const std::string& path);

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Distributional gradient of u = a * 1_{x . n > offset}: finite differences
/// of the rasterized step, integrated per cell. Values in R^{ell x d}
/// (row-major channels), concentrating as a (x) n on the jump hyperplane.
GridMeasure make_bv_jump(int d, int ell, const Eigen::VectorXd& a, Eigen::VectorXd normal,
                         double offset, const GridParams& grid, std::uint64_t seed = 0);

/// Symmetrized gradient Eu of the same jump map (a is a d-vector); values are
/// flattened symmetric matrices concentrating as a (.) n.
GridMeasure make_bd_jump(int d, const Eigen::VectorXd& a, Eigen::VectorXd normal, double offset,
                         const GridParams& grid, std::uint64_t seed = 0);

/// Constant m-vector value times Hausdorff measure on an affine subspace.
/// Lines (dim 1) may have any direction (exact cell traversal); higher
/// dimensional planes must be axis-aligned: `fixed_axes[i]` pins coordinate
/// axis_positions[i].
GridMeasure make_line_measure(int d, const Eigen::VectorXd& value, const Eigen::VectorXd& point,
                              Eigen::VectorXd direction, const GridParams& grid);
GridMeasure make_axis_plane_measure(int d, const Eigen::VectorXd& value,
                                    const std::vector<int>& fixed_axes,
                                    const std::vector<double>& axis_positions,
                                    const GridParams& grid);

// ---------------------------------------------------------------------------
// Decomposition, polar, blow-up
// ---------------------------------------------------------------------------

/// Discrete Lebesgue split. Cells whose density exceeds
/// threshold * reference are singular; the rest feed the a.c. density.
/// The reference density is min(median positive density, mean density), which
/// stays at the absolutely continuous scale even when the measure is purely
/// singular. ac + singular reproduces the input cell-by-cell exactly.
struct Decomposition {
    std::vector<double> ac_density;  // per cell, m channels (value per volume)
    GridMeasure singular;
    double threshold_used = 0.0;
    double reference_density = 0.0;

    double ac_mass(const GridMeasure& original) const;
    double singular_mass() const { return singular.total_variation(); }
};

Decomposition lebesgue_decompose(const GridMeasure& mu, double density_threshold = 10.0);

/// Unit polar vector per cell where cell mass >= mass_floor * max cell mass.
struct PolarField {
    int m = 0;
    std::vector<double> directions;  // cell-major, m channels
    std::vector<std::uint8_t> present;
    double mass_floor_used = 0.0;

    Eigen::Map<const Eigen::VectorXd> at(long long cell) const {
        return Eigen::Map<const Eigen::VectorXd>(directions.data() + cell * m, m);
    }
    bool has(long long cell) const { return present[static_cast<std::size_t>(cell)] != 0; }
};

PolarField polar(const GridMeasure& mu, double mass_floor = 1e-9);

/// Push-forward under y -> (y - x0) / r normalized by |mu|(B_r(x0)), splatted
/// onto a fresh grid covering the unit ball (box [-1.2, 1.2]^d). Total mass
/// inside B_1 comes out as 1 up to discretization error.
GridMeasure blowup(const GridMeasure& mu, const Eigen::VectorXd& x0, double r, int out_cells);

/// |mu|(ball) by summing cells whose centers lie inside.
double ball_mass(const GridMeasure& mu, const Eigen::VectorXd& center, double radius);

// ---------------------------------------------------------------------------
// Weak-form residual
// ---------------------------------------------------------------------------

/// Max over seeded random test functions phi (products of per-axis polynomial
/// bumps, derivatives evaluated analytically) of
///   | sum_cells value . (A* phi)(center) | / ||phi||_{C^k},
/// the distributional pairing <A mu, phi> evaluated as a cell sum.
double afree_residual(const PdeOperator& op, const GridMeasure& mu, int test_count = 20,
                      std::uint64_t seed = 0);

}  // namespace wavecone
