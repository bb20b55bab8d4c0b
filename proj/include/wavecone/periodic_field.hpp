#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "wavecone/errors.hpp"

namespace wavecone {

/// Complex vector field sampled on a periodic grid: N points per axis over a
/// torus of physical period L, samples at x_i = origin + i * (L / N).
/// Frequencies are in cycles per unit length (matching the 2 pi-explicit
/// transform convention), the k-th mode carrying xi = k~ / L with k~ the
/// signed index.
struct PeriodicField {
    int d = 0;
    int channels = 1;
    int n = 0;          // samples per axis
    double period = 1.0;
    double origin = 0.0;  // same for all axes
    std::vector<std::complex<double>> values;  // cell-major, channel-minor

    PeriodicField() = default;
    PeriodicField(int d_, int channels_, int n_, double period_, double origin_ = 0.0);

    long long cell_count() const;
    double spacing() const { return period / n; }
    double cell_volume() const;

    Eigen::VectorXd point(long long flat) const;
    std::vector<int> cell_coords(long long flat) const;
    long long flat_index(const std::vector<int>& idx) const;

    std::complex<double>& at(long long cell, int channel) {
        return values[static_cast<std::size_t>(cell * channels + channel)];
    }
    std::complex<double> at(long long cell, int channel) const {
        return values[static_cast<std::size_t>(cell * channels + channel)];
    }

    /// Signed frequency index for one axis position.
    int signed_index(int k) const { return k < (n + 1) / 2 ? k : k - n; }

    /// Frequency vector (cycles per unit length) of a spectral cell.
    Eigen::VectorXd frequency(long long flat) const;

    /// Fills from a per-point function (channels-sized complex vector).
    static PeriodicField from_function(
        int d, int channels, int n, double period, double origin,
        const std::function<Eigen::VectorXcd(const Eigen::VectorXd&)>& f);
};

/// Matrix-valued Fourier multiplier: frequency (cycles) -> c_out x c_in.
struct MultiplierSpec {
    std::string label;
    int c_in = 1;
    int c_out = 1;
    std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)> evaluator;
};

/// Forward transform: hat u(k) = h^d sum_x u(x) e^{-2 pi i x . xi_k}
/// (the Riemann sum of the integral transform; grid-origin phases cancel
/// between forward and inverse and are omitted). Layout matches the field.
std::vector<std::complex<double>> fft_forward(const PeriodicField& f);
void fft_inverse(PeriodicField& f, const std::vector<std::complex<double>>& spectrum);

/// Per-frequency matrix multiply in Fourier space. Identity multipliers
/// return the input up to round-off.
PeriodicField apply_multiplier(const PeriodicField& f, const MultiplierSpec& m);

/// Bessel potential (Id - Laplace)^{-s/2}: multiplier (1 + 4 pi^2 |xi|^2)^{-s/2}.
PeriodicField bessel_potential(const PeriodicField& f, double s);

MultiplierSpec bessel_multiplier(double s);
MultiplierSpec identity_multiplier(int channels);

/// Pointwise product multiplier b(xi) = second(xi) * first(xi).
MultiplierSpec compose_multipliers(const MultiplierSpec& first, const MultiplierSpec& second);

// Norms over the torus (cell sums times cell volume); |f(x)| is the channel
// Euclidean norm.
double lp_norm(const PeriodicField& f, double p);
double sup_norm(const PeriodicField& f);
double l1_distance(const PeriodicField& a, const PeriodicField& b);

/// Spectral energy fraction carried by modes with max_axis |k~| above
/// 3/4 of the Nyquist index; the aliasing health number in reports.
double high_band_energy_fraction(const PeriodicField& f);

/// Distribution-function profile: rows (lambda, lambda * vol{|f| > lambda})
/// over 64 log-spaced levels, plus the exact supremum over all levels.
struct Weak11Profile {
    std::vector<std::pair<double, double>> table;
    double headline = 0.0;  // sup_lambda lambda * vol{|f| > lambda}
};

Weak11Profile weak11_profile(const PeriodicField& f);

/// Mollifier phi_eps: C^2 polynomial bump (1 - |x/eps|^2)^3 or a Gaussian
/// (sigma = eps) truncated at 4 sigma, sampled on the grid and normalized to
/// unit grid integral.
struct MollifierSpec {
    enum class Shape { PolynomialBump, TruncatedGaussian };
    Shape shape = Shape::PolynomialBump;
    double epsilon = 0.1;
};

PeriodicField mollifier_kernel(int d, int n, double period, double origin,
                               const MollifierSpec& spec);

/// Periodic convolution with the mollifier kernel (spectral product).
PeriodicField mollify(const PeriodicField& f, const MollifierSpec& spec);

}  // namespace wavecone
