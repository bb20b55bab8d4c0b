#include "wavecone/sphere.hpp"

#include <cmath>
#include <numbers>

namespace wavecone {

namespace {

constexpr double kGolden = 0.6180339887498948482;  // 1/phi

double seed_phase(std::uint64_t seed) {
    // Deterministic rotation in [0, 2 pi) so different seeds shift the lattice.
    const double frac = static_cast<double>(seed % 1000003ULL) / 1000003.0;
    return 2.0 * std::numbers::pi * frac;
}

}  // namespace

std::vector<Eigen::VectorXd> sphere_samples(int d, const SphereSampling& sampling) {
    std::vector<Eigen::VectorXd> pts;
    const int count = std::max(sampling.count, 2);
    pts.reserve(static_cast<std::size_t>(count));

    if (d == 1) {
        Eigen::VectorXd plus(1), minus(1);
        plus << 1.0;
        minus << -1.0;
        pts.push_back(plus);
        pts.push_back(minus);
        return pts;
    }

    if (d == 2) {
        const double phase = seed_phase(sampling.seed);
        for (int i = 0; i < count; ++i) {
            const double theta = phase + 2.0 * std::numbers::pi * (i + 0.5) / count;
            Eigen::VectorXd p(2);
            p << std::cos(theta), std::sin(theta);
            pts.push_back(std::move(p));
        }
        return pts;
    }

    if (d == 3) {
        const double phase = seed_phase(sampling.seed);
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double theta = phase + 2.0 * std::numbers::pi * kGolden * i;
            Eigen::VectorXd p(3);
            p << rho * std::cos(theta), rho * std::sin(theta), z;
            pts.push_back(std::move(p));
        }
        return pts;
    }

    Rng rng(sampling.seed ^ 0x5be5dull);
    while (static_cast<int>(pts.size()) < count) {
        Eigen::VectorXd g(d);
        for (int i = 0; i < d; ++i) g[i] = rng.normal();
        const double norm = g.norm();
        if (norm < 1e-12) continue;
        pts.push_back(g / norm);
    }
    return pts;
}

Eigen::VectorXd refine_on_sphere(const std::function<double(const Eigen::VectorXd&)>& objective,
                                 Eigen::VectorXd start, double& best_value,
                                 const SphereSampling& sampling) {
    const int d = static_cast<int>(start.size());
    Rng rng(sampling.seed ^ 0x8ef15e5ull);
    double scale = 1.0;
    constexpr int kProposalsPerStep = 32;
    for (int step = 0; step < sampling.refine_steps; ++step) {
        for (int p = 0; p < kProposalsPerStep; ++p) {
            Eigen::VectorXd cand = start;
            for (int i = 0; i < d; ++i) cand[i] += scale * rng.normal();
            const double norm = cand.norm();
            if (norm < 1e-12) continue;
            cand /= norm;
            const double value = objective(cand);
            if (sphere_min_less(value, cand, best_value, start)) {
                best_value = value;
                start = cand;
            }
        }
        scale *= sampling.refine_shrink;
    }
    return start;
}

bool sphere_min_less(double value_a, const Eigen::VectorXd& a, double value_b,
                     const Eigen::VectorXd& b) {
    if (value_a != value_b) return value_a < value_b;
    for (Eigen::Index i = 0; i < a.size() && i < b.size(); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

}  // namespace wavecone
