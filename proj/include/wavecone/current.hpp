#pragma once

#include "wavecone/exterior.hpp"
#include "wavecone/grid_measure.hpp"

namespace wavecone {

/// k-current discretized as a grid measure with Lambda_k(R^d) values
/// (C(d,k) coefficient channels in the increasing-tuple basis).
struct DiscreteCurrent {
    int degree = 0;
    GridMeasure measure;

    int dimension() const { return measure.dimension(); }
};

/// Current supported on an affine subspace with a constant orientation:
/// orientation (x) Hausdorff measure restricted to the plane. The plane is
/// given by pinned axes (positions on those axes); its dimension is
/// d - #fixed and is independent of the orientation degree.
DiscreteCurrent make_current_segment(int d, const KVector& orientation,
                                     const std::vector<int>& fixed_axes,
                                     const std::vector<double>& axis_positions,
                                     const GridParams& grid);

/// Segment variant for 1-dimensional supports of arbitrary direction.
DiscreteCurrent make_current_line(int d, const KVector& orientation,
                                  const Eigen::VectorXd& point, const Eigen::VectorXd& direction,
                                  const GridParams& grid);

/// Boundary dT = -sum_i d_i T |_ dx^i with central differences in the
/// interior, second-order one-sided stencils at box edges, periodic wrap when
/// the grid is flagged periodic. Degree drops by one; on smooth compactly
/// supported data the result converges at order h^2.
DiscreteCurrent boundary(const DiscreteCurrent& current);

/// <T, omega> for a smooth k-form given by per-point coefficients
/// (quadrature at cell centers). Used by duality tests and diagnostics.
double pair_with_form(const DiscreteCurrent& current,
                      const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& form_coeffs);

}  // namespace wavecone
