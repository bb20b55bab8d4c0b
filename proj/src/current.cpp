#include "wavecone/current.hpp"

#include <functional>

namespace wavecone {

DiscreteCurrent make_current_segment(int d, const KVector& orientation,
                                     const std::vector<int>& fixed_axes,
                                     const std::vector<double>& axis_positions,
                                     const GridParams& grid) {
    if (orientation.d != d) throw DimensionError("orientation dimension mismatch");
    if (orientation.norm() <= 0.0) throw DegenerateVector("orientation must be nonzero");
    DiscreteCurrent current;
    current.degree = orientation.k;
    current.measure =
        make_axis_plane_measure(d, orientation.coeffs, fixed_axes, axis_positions, grid);
    return current;
}

DiscreteCurrent make_current_line(int d, const KVector& orientation, const Eigen::VectorXd& point,
                                  const Eigen::VectorXd& direction, const GridParams& grid) {
    if (orientation.d != d) throw DimensionError("orientation dimension mismatch");
    if (orientation.norm() <= 0.0) throw DegenerateVector("orientation must be nonzero");
    DiscreteCurrent current;
    current.degree = orientation.k;
    current.measure = make_line_measure(d, orientation.coeffs, point, direction, grid);
    return current;
}

namespace {

// Finite difference of per-cell values along one axis; same stencils as the
// scalar version in grid_measure.cpp but applied to all channels at once.
GridMeasure axis_difference(const GridMeasure& mu, int axis) {
    const int N = mu.cells_per_axis();
    if (N < 3) throw DimensionError("boundary needs >= 3 cells per axis");
    const double h = mu.cell_size(axis);
    GridMeasure out(mu.dimension(), mu.channels(), mu.grid());
    for (long long c = 0; c < mu.cell_count(); ++c) {
        auto idx = mu.cell_coords(c);
        const int i = idx[static_cast<std::size_t>(axis)];
        auto value_at = [&](int j) {
            auto probe = idx;
            probe[static_cast<std::size_t>(axis)] = j;
            return mu.value(mu.flat_index(probe));
        };
        Eigen::VectorXd deriv(mu.channels());
        if (mu.periodic()) {
            deriv = (value_at((i + 1) % N) - value_at((i + N - 1) % N)) / (2.0 * h);
        } else if (i == 0) {
            deriv = (-3.0 * value_at(0) + 4.0 * value_at(1) - value_at(2)) / (2.0 * h);
        } else if (i == N - 1) {
            deriv = (3.0 * value_at(N - 1) - 4.0 * value_at(N - 2) + value_at(N - 3)) / (2.0 * h);
        } else {
            deriv = (value_at(i + 1) - value_at(i - 1)) / (2.0 * h);
        }
        out.value(c) = deriv;
    }
    return out;
}

}  // namespace

DiscreteCurrent boundary(const DiscreteCurrent& current) {
    if (current.degree < 1) throw DegreeUnderflow("0-currents have no boundary");
    const int d = current.dimension();
    const int k = current.degree;
    DiscreteCurrent result;
    result.degree = k - 1;
    result.measure =
        GridMeasure(d, static_cast<int>(binomial(d, k - 1)), current.measure.grid());
    // Axis-major accumulation keeps the summation order fixed.
    for (int axis = 0; axis < d; ++axis) {
        const Eigen::MatrixXd contraction = axis_contraction_matrix(d, k, axis);
        const GridMeasure diff = axis_difference(current.measure, axis);
        for (long long c = 0; c < diff.cell_count(); ++c) {
            result.measure.value(c) += -(contraction * diff.value(c));
        }
    }
    return result;
}

double pair_with_form(const DiscreteCurrent& current,
                      const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& form_coeffs) {
    double acc = 0.0;
    for (long long c = 0; c < current.measure.cell_count(); ++c) {
        const Eigen::VectorXd omega = form_coeffs(current.measure.cell_center(c));
        if (omega.size() != current.measure.channels())
            throw DimensionError("form coefficient count must match the current degree");
        acc += current.measure.value(c).dot(omega);
    }
    return acc;
}

}  // namespace wavecone
