#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "wavecone/rng.hpp"

namespace wavecone {

/// Parameters for sampling the unit sphere and refining a candidate minimum.
/// Identical values produce identical sample sets and refinement paths.
struct SphereSampling {
    int count = 4096;
    std::uint64_t seed = 0;
    int refine_steps = 60;
    double refine_shrink = 0.7;
};

/// Deterministic unit-sphere samples: antipodal pair for d = 1, low-discrepancy
/// (golden-angle / Fibonacci lattice) for d = 2, 3, seeded Gaussian directions
/// for d > 3.
std::vector<Eigen::VectorXd> sphere_samples(int d, const SphereSampling& sampling);

/// Derivative-free local minimization of `objective` on the unit sphere:
/// shrinking Gaussian perturbations projected back to the sphere. Returns the
/// improved point; `best_value` is updated in place. Deterministic for a
/// fixed sampling (seed, steps, shrink).
Eigen::VectorXd refine_on_sphere(const std::function<double(const Eigen::VectorXd&)>& objective,
                                 Eigen::VectorXd start, double& best_value,
                                 const SphereSampling& sampling);

/// Tie-break used wherever sphere minima are reduced: smaller value wins,
/// then lexicographically smaller point, so parallel and serial runs agree.
bool sphere_min_less(double value_a, const Eigen::VectorXd& a, double value_b,
                     const Eigen::VectorXd& b);

}  // namespace wavecone
