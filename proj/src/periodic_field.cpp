#include "wavecone/periodic_field.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace wavecone {

PeriodicField::PeriodicField(int d_, int channels_, int n_, double period_, double origin_)
    : d(d_), channels(channels_), n(n_), period(period_), origin(origin_) {
    if (d < 1 || channels < 1 || n < 1) throw DimensionError("PeriodicField needs d, c, n >= 1");
    if (period <= 0.0) throw DimensionError("period must be positive");
    values.assign(static_cast<std::size_t>(cell_count()) * channels, {0.0, 0.0});
}

long long PeriodicField::cell_count() const {
    long long c = 1;
    for (int i = 0; i < d; ++i) c *= n;
    return c;
}

double PeriodicField::cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= spacing();
    return v;
}

std::vector<int> PeriodicField::cell_coords(long long flat) const {
    std::vector<int> idx(static_cast<std::size_t>(d));
    for (int i = d - 1; i >= 0; --i) {
        idx[static_cast<std::size_t>(i)] = static_cast<int>(flat % n);
        flat /= n;
    }
    return idx;
}

long long PeriodicField::flat_index(const std::vector<int>& idx) const {
    long long flat = 0;
    for (int i = 0; i < d; ++i) {
        int j = idx[static_cast<std::size_t>(i)] % n;
        if (j < 0) j += n;
        flat = flat * n + j;
    }
    return flat;
}

Eigen::VectorXd PeriodicField::point(long long flat) const {
    const auto idx = cell_coords(flat);
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x[i] = origin + idx[static_cast<std::size_t>(i)] * spacing();
    return x;
}

Eigen::VectorXd PeriodicField::frequency(long long flat) const {
    const auto idx = cell_coords(flat);
    Eigen::VectorXd xi(d);
    for (int i = 0; i < d; ++i)
        xi[i] = static_cast<double>(signed_index(idx[static_cast<std::size_t>(i)])) / period;
    return xi;
}

PeriodicField PeriodicField::from_function(
    int d, int channels, int n, double period, double origin,
    const std::function<Eigen::VectorXcd(const Eigen::VectorXd&)>& f) {
    PeriodicField field(d, channels, n, period, origin);
    for (long long c = 0; c < field.cell_count(); ++c) {
        const Eigen::VectorXcd v = f(field.point(c));
        if (v.size() != channels) throw DimensionError("builder returned wrong channel count");
        for (int ch = 0; ch < channels; ++ch) field.at(c, ch) = v[ch];
    }
    return field;
}

namespace {

// FFTW planning is not thread-safe; execution of independent plans is.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

void run_fftw(int d, int n, std::vector<std::complex<double>>& buffer, int sign) {
    std::vector<int> dims(static_cast<std::size_t>(d), n);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        plan = fftw_plan_dft(d, dims.data(), reinterpret_cast<fftw_complex*>(buffer.data()),
                             reinterpret_cast<fftw_complex*>(buffer.data()), sign,
                             FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(plan);
    }
}

}  // namespace

std::vector<std::complex<double>> fft_forward(const PeriodicField& f) {
    const long long cells = f.cell_count();
    std::vector<std::complex<double>> spectrum(f.values.size());
    std::vector<std::complex<double>> buffer(static_cast<std::size_t>(cells));
    const double scale = f.cell_volume();
    for (int ch = 0; ch < f.channels; ++ch) {
        for (long long c = 0; c < cells; ++c) buffer[static_cast<std::size_t>(c)] = f.at(c, ch);
        run_fftw(f.d, f.n, buffer, FFTW_FORWARD);
        for (long long c = 0; c < cells; ++c)
            spectrum[static_cast<std::size_t>(c * f.channels + ch)] =
                scale * buffer[static_cast<std::size_t>(c)];
    }
    return spectrum;
}

void fft_inverse(PeriodicField& f, const std::vector<std::complex<double>>& spectrum) {
    const long long cells = f.cell_count();
    if (spectrum.size() != f.values.size()) throw DimensionError("spectrum size mismatch");
    std::vector<std::complex<double>> buffer(static_cast<std::size_t>(cells));
    double volume = 1.0;
    for (int i = 0; i < f.d; ++i) volume *= f.period;
    const double scale = 1.0 / volume;
    for (int ch = 0; ch < f.channels; ++ch) {
        for (long long c = 0; c < cells; ++c)
            buffer[static_cast<std::size_t>(c)] =
                spectrum[static_cast<std::size_t>(c * f.channels + ch)];
        run_fftw(f.d, f.n, buffer, FFTW_BACKWARD);
        for (long long c = 0; c < cells; ++c) f.at(c, ch) = scale * buffer[static_cast<std::size_t>(c)];
    }
}

PeriodicField apply_multiplier(const PeriodicField& f, const MultiplierSpec& m) {
    if (m.c_in != f.channels)
        throw DimensionError("multiplier expects " + std::to_string(m.c_in) + " channels, field has " +
                             std::to_string(f.channels));
    const auto spectrum = fft_forward(f);
    PeriodicField out(f.d, m.c_out, f.n, f.period, f.origin);
    std::vector<std::complex<double>> out_spectrum(out.values.size());
    Eigen::VectorXcd in_modes(f.channels);
    for (long long c = 0; c < f.cell_count(); ++c) {
        const Eigen::VectorXd xi = f.frequency(c);
        const Eigen::MatrixXcd mat = m.evaluator(xi);
        if (mat.rows() != m.c_out || mat.cols() != m.c_in)
            throw DimensionError("multiplier evaluator returned wrong shape");
        for (int ch = 0; ch < f.channels; ++ch)
            in_modes[ch] = spectrum[static_cast<std::size_t>(c * f.channels + ch)];
        const Eigen::VectorXcd out_modes = mat * in_modes;
        for (int ch = 0; ch < m.c_out; ++ch)
            out_spectrum[static_cast<std::size_t>(c * m.c_out + ch)] = out_modes[ch];
    }
    fft_inverse(out, out_spectrum);
    return out;
}

MultiplierSpec bessel_multiplier(double s) {
    if (s <= 0.0) throw InvalidExponent("Bessel exponent must be positive");
    MultiplierSpec m;
    m.label = "bessel(s=" + std::to_string(s) + ")";
    m.c_in = m.c_out = 1;
    m.evaluator = [s](const Eigen::VectorXd& xi) {
        const double factor =
            std::pow(1.0 + 4.0 * std::numbers::pi * std::numbers::pi * xi.squaredNorm(), -s / 2.0);
        return Eigen::MatrixXcd::Constant(1, 1, factor);
    };
    return m;
}

PeriodicField bessel_potential(const PeriodicField& f, double s) {
    if (s <= 0.0) throw InvalidExponent("Bessel exponent must be positive");
    // Scalar multiplier applied channel-wise.
    const auto spectrum = fft_forward(f);
    PeriodicField out(f.d, f.channels, f.n, f.period, f.origin);
    std::vector<std::complex<double>> out_spectrum(spectrum.size());
    for (long long c = 0; c < f.cell_count(); ++c) {
        const double factor = std::pow(
            1.0 + 4.0 * std::numbers::pi * std::numbers::pi * f.frequency(c).squaredNorm(),
            -s / 2.0);
        for (int ch = 0; ch < f.channels; ++ch)
            out_spectrum[static_cast<std::size_t>(c * f.channels + ch)] =
                factor * spectrum[static_cast<std::size_t>(c * f.channels + ch)];
    }
    fft_inverse(out, out_spectrum);
    return out;
}

MultiplierSpec identity_multiplier(int channels) {
    MultiplierSpec m;
    m.label = "identity";
    m.c_in = m.c_out = channels;
    m.evaluator = [channels](const Eigen::VectorXd&) {
        return Eigen::MatrixXcd::Identity(channels, channels);
    };
    return m;
}

MultiplierSpec compose_multipliers(const MultiplierSpec& first, const MultiplierSpec& second) {
    if (second.c_in != first.c_out)
        throw DimensionError("multiplier composition shape mismatch");
    MultiplierSpec m;
    m.label = second.label + " o " + first.label;
    m.c_in = first.c_in;
    m.c_out = second.c_out;
    auto f = first.evaluator;
    auto g = second.evaluator;
    m.evaluator = [f, g](const Eigen::VectorXd& xi) -> Eigen::MatrixXcd { return g(xi) * f(xi); };
    return m;
}

namespace {

double cell_magnitude(const PeriodicField& f, long long cell) {
    double sq = 0.0;
    for (int ch = 0; ch < f.channels; ++ch) sq += std::norm(f.at(cell, ch));
    return std::sqrt(sq);
}

}  // namespace

double lp_norm(const PeriodicField& f, double p) {
    if (p <= 0.0) throw InvalidExponent("p must be positive");
    double acc = 0.0;
    for (long long c = 0; c < f.cell_count(); ++c) acc += std::pow(cell_magnitude(f, c), p);
    return std::pow(acc * f.cell_volume(), 1.0 / p);
}

double sup_norm(const PeriodicField& f) {
    double m = 0.0;
    for (long long c = 0; c < f.cell_count(); ++c) m = std::max(m, cell_magnitude(f, c));
    return m;
}

double l1_distance(const PeriodicField& a, const PeriodicField& b) {
    if (a.values.size() != b.values.size() || a.channels != b.channels)
        throw DimensionError("fields must share the grid for distances");
    double acc = 0.0;
    for (long long c = 0; c < a.cell_count(); ++c) {
        double sq = 0.0;
        for (int ch = 0; ch < a.channels; ++ch) sq += std::norm(a.at(c, ch) - b.at(c, ch));
        acc += std::sqrt(sq);
    }
    return acc * a.cell_volume();
}

double high_band_energy_fraction(const PeriodicField& f) {
    const auto spectrum = fft_forward(f);
    const int cutoff = (3 * (f.n / 2)) / 4;
    double total = 0.0, high = 0.0;
    for (long long c = 0; c < f.cell_count(); ++c) {
        double sq = 0.0;
        for (int ch = 0; ch < f.channels; ++ch)
            sq += std::norm(spectrum[static_cast<std::size_t>(c * f.channels + ch)]);
        total += sq;
        const auto idx = f.cell_coords(c);
        int max_abs = 0;
        for (int i = 0; i < f.d; ++i)
            max_abs = std::max(max_abs, std::abs(f.signed_index(idx[static_cast<std::size_t>(i)])));
        if (max_abs > cutoff) high += sq;
    }
    return total > 0.0 ? high / total : 0.0;
}

Weak11Profile weak11_profile(const PeriodicField& f) {
    Weak11Profile profile;
    const long long cells = f.cell_count();
    std::vector<double> magnitudes(static_cast<std::size_t>(cells));
    double max_mag = 0.0;
    for (long long c = 0; c < cells; ++c) {
        magnitudes[static_cast<std::size_t>(c)] = cell_magnitude(f, c);
        max_mag = std::max(max_mag, magnitudes[static_cast<std::size_t>(c)]);
    }
    if (max_mag <= 0.0) return profile;

    // Exact supremum: lambda * vol is maximized just below a sorted magnitude.
    std::sort(magnitudes.begin(), magnitudes.end(), std::greater<double>());
    const double vol = f.cell_volume();
    for (std::size_t i = 0; i < magnitudes.size(); ++i) {
        if (magnitudes[i] <= 0.0) break;
        profile.headline =
            std::max(profile.headline, magnitudes[i] * static_cast<double>(i + 1) * vol);
    }

    constexpr int kLevels = 64;
    const double lo = max_mag * 1e-6;
    for (int level = 0; level < kLevels; ++level) {
        const double lambda =
            lo * std::pow(max_mag / lo, static_cast<double>(level) / (kLevels - 1));
        std::size_t count = 0;  // magnitudes sorted descending
        for (const double m : magnitudes) {
            if (m > lambda)
                ++count;
            else
                break;
        }
        profile.table.emplace_back(lambda, lambda * static_cast<double>(count) * vol);
    }
    return profile;
}

PeriodicField mollifier_kernel(int d, int n, double period, double origin,
                               const MollifierSpec& spec) {
    if (spec.epsilon <= 0.0) throw DimensionError("mollifier width must be positive");
    PeriodicField kernel(d, 1, n, period, origin);
    const double eps = spec.epsilon;
    double sum = 0.0;
    for (long long c = 0; c < kernel.cell_count(); ++c) {
        Eigen::VectorXd x = kernel.point(c);
        // Minimal-image distance to the origin on the torus.
        for (int i = 0; i < d; ++i) x[i] -= period * std::round(x[i] / period);
        const double r = x.norm();
        double v = 0.0;
        if (spec.shape == MollifierSpec::Shape::PolynomialBump) {
            const double t = r / eps;
            if (t < 1.0) {
                const double s = 1.0 - t * t;
                v = s * s * s;
            }
        } else {
            if (r < 4.0 * eps) v = std::exp(-0.5 * (r / eps) * (r / eps));
        }
        kernel.at(c, 0) = v;
        sum += v;
    }
    if (sum <= 0.0) throw EmptyMeasure("mollifier kernel vanishes on this grid");
    const double normalizer = 1.0 / (sum * kernel.cell_volume());
    for (auto& v : kernel.values) v *= normalizer;
    return kernel;
}

PeriodicField mollify(const PeriodicField& f, const MollifierSpec& spec) {
    const PeriodicField kernel = mollifier_kernel(f.d, f.n, f.period, f.origin, spec);
    const auto kernel_spectrum = fft_forward(kernel);
    const auto spectrum = fft_forward(f);
    PeriodicField out(f.d, f.channels, f.n, f.period, f.origin);
    std::vector<std::complex<double>> out_spectrum(spectrum.size());
    for (long long c = 0; c < f.cell_count(); ++c) {
        const std::complex<double> g = kernel_spectrum[static_cast<std::size_t>(c)];
        for (int ch = 0; ch < f.channels; ++ch)
            out_spectrum[static_cast<std::size_t>(c * f.channels + ch)] =
                g * spectrum[static_cast<std::size_t>(c * f.channels + ch)];
    }
    fft_inverse(out, out_spectrum);
    return out;
}

}  // namespace wavecone
