#include "wavecone/grid_measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>

#include "wavecone/sym_basis.hpp"

namespace wavecone {

GridParams GridParams::unit_box(int d, int cells, bool periodic) {
    GridParams g;
    g.lo = Eigen::VectorXd::Zero(d);
    g.hi = Eigen::VectorXd::Ones(d);
    g.cells = cells;
    g.periodic = periodic;
    return g;
}

GridMeasure::GridMeasure(int d, int m, GridParams grid) : d_(d), m_(m), grid_(std::move(grid)) {
    if (d < 1 || m < 1) throw DimensionError("GridMeasure needs d, m >= 1");
    if (grid_.lo.size() != d || grid_.hi.size() != d)
        throw DimensionError("grid bounds must have length d");
    if (grid_.cells < 1) throw DimensionError("grid needs >= 1 cell per axis");
    for (int i = 0; i < d; ++i) {
        if (!(grid_.hi[i] > grid_.lo[i])) throw DimensionError("box must have positive volume");
    }
    values_.assign(static_cast<std::size_t>(cell_count()) * m_, 0.0);
}

long long GridMeasure::cell_count() const {
    long long c = 1;
    for (int i = 0; i < d_; ++i) c *= grid_.cells;
    return c;
}

double GridMeasure::cell_size(int axis) const {
    return (grid_.hi[axis] - grid_.lo[axis]) / grid_.cells;
}

double GridMeasure::cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < d_; ++i) v *= cell_size(i);
    return v;
}

double GridMeasure::box_volume() const {
    double v = 1.0;
    for (int i = 0; i < d_; ++i) v *= grid_.hi[i] - grid_.lo[i];
    return v;
}

long long GridMeasure::flat_index(const std::vector<int>& idx) const {
    long long flat = 0;
    for (int i = 0; i < d_; ++i) flat = flat * grid_.cells + idx[static_cast<std::size_t>(i)];
    return flat;
}

std::vector<int> GridMeasure::cell_coords(long long flat) const {
    std::vector<int> idx(static_cast<std::size_t>(d_));
    for (int i = d_ - 1; i >= 0; --i) {
        idx[static_cast<std::size_t>(i)] = static_cast<int>(flat % grid_.cells);
        flat /= grid_.cells;
    }
    return idx;
}

Eigen::VectorXd GridMeasure::cell_center(long long flat) const {
    const auto idx = cell_coords(flat);
    Eigen::VectorXd x(d_);
    for (int i = 0; i < d_; ++i)
        x[i] = grid_.lo[i] + (idx[static_cast<std::size_t>(i)] + 0.5) * cell_size(i);
    return x;
}

Eigen::Map<Eigen::VectorXd> GridMeasure::value(long long cell) {
    return {values_.data() + cell * m_, m_};
}

Eigen::Map<const Eigen::VectorXd> GridMeasure::value(long long cell) const {
    return {values_.data() + cell * m_, m_};
}

double GridMeasure::total_variation() const {
    double tv = 0.0;
    const long long cells = cell_count();
    for (long long c = 0; c < cells; ++c) tv += cell_mass(c);
    return tv;
}

// ---------------------------------------------------------------------------
// Binary + CSV I/O
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[5] = {'G', 'M', 'E', 'S', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void save_grid_measure(const GridMeasure& mu, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write measure file: " + path);
    out.write(kMagic, 5);
    put_u32(out, static_cast<std::uint32_t>(mu.dimension()));
    put_u32(out, static_cast<std::uint32_t>(mu.channels()));
    put_u32(out, static_cast<std::uint32_t>(mu.cells_per_axis()));
    put_u32(out, mu.periodic() ? 1u : 0u);
    for (int i = 0; i < mu.dimension(); ++i) put_f64(out, mu.grid().lo[i]);
    for (int i = 0; i < mu.dimension(); ++i) put_f64(out, mu.grid().hi[i]);
    for (double v : mu.raw_values()) put_f64(out, v);
}

GridMeasure load_grid_measure(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open measure file: " + path);
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kMagic, 5) != 0)
        throw ParseError("not a GMES1 measure file: " + path);
    const int d = static_cast<int>(get_u32(in));
    const int m = static_cast<int>(get_u32(in));
    const int cells = static_cast<int>(get_u32(in));
    const bool periodic = get_u32(in) != 0;
    if (d < 1 || d > 16 || m < 1) throw ParseError("corrupt measure header");
    GridParams grid;
    grid.lo = Eigen::VectorXd(d);
    grid.hi = Eigen::VectorXd(d);
    grid.cells = cells;
    grid.periodic = periodic;
    for (int i = 0; i < d; ++i) grid.lo[i] = get_f64(in);
    for (int i = 0; i < d; ++i) grid.hi[i] = get_f64(in);
    GridMeasure mu(d, m, grid);
    for (double& v : mu.raw_values()) v = get_f64(in);
    if (!in) throw ParseError("truncated measure file: " + path);
    return mu;
}

void write_grid_measure_csv(const GridMeasure& mu, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write CSV file: " + path);
    out << "# d=" << mu.dimension() << " m=" << mu.channels()
        << " cells=" << mu.cells_per_axis() << "\n";
    out.precision(12);
    for (long long c = 0; c < mu.cell_count(); ++c) {
        const auto idx = mu.cell_coords(c);
        for (int i = 0; i < mu.dimension(); ++i) out << idx[static_cast<std::size_t>(i)] << ",";
        const Eigen::VectorXd x = mu.cell_center(c);
        for (int i = 0; i < mu.dimension(); ++i) out << x[i] << ",";
        const auto v = mu.value(c);
        for (int i = 0; i < mu.channels(); ++i) out << v[i] << (i + 1 < mu.channels() ? "," : "\n");
    }
}

// ---------------------------------------------------------------------------
// Halfspace rasterization
// ---------------------------------------------------------------------------

namespace {

// Fraction of the unit cube with w . u > t, all entries of w arbitrary.
// Exact via the box-simplex inclusion-exclusion formula after flipping signs.
double unit_cube_halfspace_fraction_exact(Eigen::VectorXd w, double t) {
    // Flip negative components: u_i -> 1 - u_i.
    for (int i = 0; i < w.size(); ++i) {
        if (w[i] < 0.0) {
            t += -w[i];
            w[i] = -w[i];
        }
    }
    std::vector<double> pos;
    for (int i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) pos.push_back(w[i]);
    const int n = static_cast<int>(pos.size());
    if (n == 0) return t < 0.0 ? 1.0 : 0.0;
    const double total = std::accumulate(pos.begin(), pos.end(), 0.0);
    if (t <= 0.0) return 1.0;
    if (t >= total) return 0.0;
    // volume{sum w u <= t} via inclusion-exclusion over subset shifts
    double volume = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        double shift = t;
        int bits = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                shift -= pos[static_cast<std::size_t>(i)];
                ++bits;
            }
        }
        if (shift <= 0.0) continue;
        double term = 1.0;
        for (int i = 0; i < n; ++i) term *= shift / pos[static_cast<std::size_t>(i)];
        // term = shift^n / prod(w); divide by n!
        for (int i = 2; i <= n; ++i) term /= i;
        volume += (bits % 2 == 0) ? term : -term;
    }
    return std::clamp(1.0 - volume, 0.0, 1.0);
}

double unit_cube_halfspace_fraction_mc(const Eigen::VectorXd& w, double t, Rng& rng) {
    constexpr int kPoints = 10000;
    int inside = 0;
    const int d = static_cast<int>(w.size());
    for (int p = 0; p < kPoints; ++p) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += w[i] * rng.uniform01();
        if (s > t) ++inside;
    }
    return static_cast<double>(inside) / kPoints;
}

// Rasterizes 1_{x . n > offset} as per-cell volume fractions. Exact cell/plane
// intersection for d <= 3, seeded Monte Carlo beyond, both with a fast path
// for cells entirely on one side.
std::vector<double> rasterize_halfspace(const GridMeasure& shape, const Eigen::VectorXd& n,
                                        double offset, std::uint64_t seed) {
    const int d = shape.dimension();
    std::vector<double> frac(static_cast<std::size_t>(shape.cell_count()));
    Eigen::VectorXd h(d);
    for (int i = 0; i < d; ++i) h[i] = shape.cell_size(i);
    const double reach = 0.5 * h.cwiseAbs().dot(n.cwiseAbs());  // max |n.(x-c)| within cell
    Rng rng(seed ^ 0x9a5f0ull);
    for (long long c = 0; c < shape.cell_count(); ++c) {
        const double s = shape.cell_center(c).dot(n) - offset;
        double f;
        if (s > reach + 1e-15)
            f = 1.0;
        else if (s < -reach - 1e-15)
            f = 0.0;
        else {
            // In unit-cube coordinates, x = corner + h * u.
            Eigen::VectorXd w(d);
            for (int i = 0; i < d; ++i) w[i] = n[i] * h[i];
            const double t = -s + 0.5 * w.sum();  // threshold for w . u > t
            f = (d <= 3) ? unit_cube_halfspace_fraction_exact(w, t)
                         : unit_cube_halfspace_fraction_mc(w, t, rng);
        }
        frac[static_cast<std::size_t>(c)] = f;
    }
    return frac;
}

// Central differences in the interior, second-order one-sided at box edges,
// wrap-around when periodic. Input/output indexed per cell.
std::vector<double> axis_derivative(const GridMeasure& shape, const std::vector<double>& field,
                                    int axis) {
    const int N = shape.cells_per_axis();
    if (N < 3) throw DimensionError("finite differences need >= 3 cells per axis");
    const double h = shape.cell_size(axis);
    const int d = shape.dimension();
    std::vector<double> out(field.size());
    std::vector<int> idx;
    for (long long c = 0; c < shape.cell_count(); ++c) {
        idx = shape.cell_coords(c);
        const int i = idx[static_cast<std::size_t>(axis)];
        auto at = [&](int j) {
            std::vector<int> probe = idx;
            probe[static_cast<std::size_t>(axis)] = j;
            return field[static_cast<std::size_t>(shape.flat_index(probe))];
        };
        double deriv;
        if (shape.periodic()) {
            deriv = (at((i + 1) % N) - at((i + N - 1) % N)) / (2.0 * h);
        } else if (i == 0) {
            deriv = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
        } else if (i == N - 1) {
            deriv = (3.0 * at(N - 1) - 4.0 * at(N - 2) + at(N - 3)) / (2.0 * h);
        } else {
            deriv = (at(i + 1) - at(i - 1)) / (2.0 * h);
        }
        out[static_cast<std::size_t>(c)] = deriv;
    }
    return out;
}

}  // namespace

GridMeasure make_bv_jump(int d, int ell, const Eigen::VectorXd& a, Eigen::VectorXd normal,
                         double offset, const GridParams& grid, std::uint64_t seed) {
    if (a.size() != ell) throw DimensionError("jump amplitude must have length ell");
    if (normal.size() != d) throw DimensionError("normal must have length d");
    if (a.norm() <= 0.0) throw EmptyMeasure("zero jump amplitude gives the zero measure");
    const double n_norm = normal.norm();
    if (n_norm <= 0.0) throw DegenerateVector("jump normal must be nonzero");
    normal /= n_norm;

    GridMeasure mu(d, ell * d, grid);
    const auto frac = rasterize_halfspace(mu, normal, offset, seed);
    const double vol = mu.cell_volume();
    // Du^k_i = a_k d_i frac; one scalar derivative field reused per axis.
    for (int axis = 0; axis < d; ++axis) {
        const auto grad = axis_derivative(mu, frac, axis);
        for (long long c = 0; c < mu.cell_count(); ++c) {
            auto v = mu.value(c);
            for (int k = 0; k < ell; ++k)
                v[k * d + axis] = a[k] * grad[static_cast<std::size_t>(c)] * vol;
        }
    }
    if (mu.total_variation() <= 0.0)
        throw EmptyMeasure("jump hyperplane does not meet the box");
    return mu;
}

GridMeasure make_bd_jump(int d, const Eigen::VectorXd& a, Eigen::VectorXd normal, double offset,
                         const GridParams& grid, std::uint64_t seed) {
    if (a.size() != d) throw DimensionError("BD jump amplitude must have length d");
    const GridMeasure du = make_bv_jump(d, d, a, std::move(normal), offset, grid, seed);
    GridMeasure mu(d, d * (d + 1) / 2, grid);
    Eigen::MatrixXd grad(d, d);
    for (long long c = 0; c < mu.cell_count(); ++c) {
        const auto v = du.value(c);
        for (int r = 0; r < d; ++r)
            for (int col = 0; col < d; ++col) grad(r, col) = v[r * d + col];
        const Eigen::MatrixXd sym = 0.5 * (grad + grad.transpose());
        mu.value(c) = sym_flatten(sym);
    }
    if (mu.total_variation() <= 0.0) throw EmptyMeasure("BD jump does not meet the box");
    return mu;
}

GridMeasure make_line_measure(int d, const Eigen::VectorXd& value, const Eigen::VectorXd& point,
                              Eigen::VectorXd direction, const GridParams& grid) {
    if (value.size() < 1) throw DimensionError("line measure needs a value vector");
    if (point.size() != d || direction.size() != d)
        throw DimensionError("point and direction must have length d");
    const double dn = direction.norm();
    if (dn <= 0.0) throw DegenerateVector("line direction must be nonzero");
    direction /= dn;

    GridMeasure mu(d, static_cast<int>(value.size()), grid);
    // Clip the parameter range to the box.
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
        if (std::abs(direction[i]) < 1e-15) {
            if (point[i] <= grid.lo[i] || point[i] >= grid.hi[i])
                throw EmptyMeasure("line misses the box");
            continue;
        }
        const double ta = (grid.lo[i] - point[i]) / direction[i];
        const double tb = (grid.hi[i] - point[i]) / direction[i];
        t0 = std::max(t0, std::min(ta, tb));
        t1 = std::min(t1, std::max(ta, tb));
    }
    if (!(t0 < t1)) throw EmptyMeasure("line misses the box");

    // Walk cell crossings; deposit value * segment length per visited cell.
    const double eps = 1e-12 * (t1 - t0);
    double t = t0;
    while (t < t1 - eps) {
        const Eigen::VectorXd probe = point + (t + eps) * direction;
        std::vector<int> idx(static_cast<std::size_t>(d));
        bool inside = true;
        for (int i = 0; i < d; ++i) {
            const int j = static_cast<int>(std::floor((probe[i] - grid.lo[i]) / mu.cell_size(i)));
            if (j < 0 || j >= grid.cells) {
                inside = false;
                break;
            }
            idx[static_cast<std::size_t>(i)] = j;
        }
        if (!inside) break;
        // Next crossing out of this cell.
        double t_next = t1;
        for (int i = 0; i < d; ++i) {
            if (std::abs(direction[i]) < 1e-15) continue;
            const double face = direction[i] > 0
                                    ? grid.lo[i] + (idx[static_cast<std::size_t>(i)] + 1) *
                                                       mu.cell_size(i)
                                    : grid.lo[i] + idx[static_cast<std::size_t>(i)] *
                                                       mu.cell_size(i);
            const double tc = (face - point[i]) / direction[i];
            if (tc > t + eps) t_next = std::min(t_next, tc);
        }
        if (t_next <= t + eps) t_next = t + eps * 2;
        mu.value(mu.flat_index(idx)) += value * (std::min(t_next, t1) - t);
        t = t_next;
    }
    if (mu.total_variation() <= 0.0) throw EmptyMeasure("line deposits no mass");
    return mu;
}

GridMeasure make_axis_plane_measure(int d, const Eigen::VectorXd& value,
                                    const std::vector<int>& fixed_axes,
                                    const std::vector<double>& axis_positions,
                                    const GridParams& grid) {
    if (fixed_axes.size() != axis_positions.size())
        throw DimensionError("fixed axes and positions must pair up");
    GridMeasure mu(d, static_cast<int>(value.size()), grid);
    std::vector<int> pin(static_cast<std::size_t>(d), -1);
    for (std::size_t i = 0; i < fixed_axes.size(); ++i) {
        const int axis = fixed_axes[i];
        if (axis < 0 || axis >= d) throw DimensionError("fixed axis out of range");
        const double pos = axis_positions[i];
        const int j = static_cast<int>(std::floor((pos - grid.lo[axis]) / mu.cell_size(axis)));
        if (j < 0 || j >= grid.cells) throw EmptyMeasure("plane misses the box");
        pin[static_cast<std::size_t>(axis)] = j;
    }
    double area = 1.0;  // Hausdorff measure per cell over the free axes
    for (int i = 0; i < d; ++i)
        if (pin[static_cast<std::size_t>(i)] < 0) area *= mu.cell_size(i);
    for (long long c = 0; c < mu.cell_count(); ++c) {
        const auto idx = mu.cell_coords(c);
        bool on_plane = true;
        for (int i = 0; i < d; ++i) {
            if (pin[static_cast<std::size_t>(i)] >= 0 &&
                idx[static_cast<std::size_t>(i)] != pin[static_cast<std::size_t>(i)]) {
                on_plane = false;
                break;
            }
        }
        if (on_plane) mu.value(c) = value * area;
    }
    if (mu.total_variation() <= 0.0) throw EmptyMeasure("plane deposits no mass");
    return mu;
}

// ---------------------------------------------------------------------------
// Decomposition / polar / blow-up
// ---------------------------------------------------------------------------

Decomposition lebesgue_decompose(const GridMeasure& mu, double density_threshold) {
    if (density_threshold <= 0.0) throw DimensionError("density threshold must be positive");
    const long long cells = mu.cell_count();
    const double vol = mu.cell_volume();
    std::vector<double> density(static_cast<std::size_t>(cells));
    std::vector<double> positive;
    double total = 0.0;
    for (long long c = 0; c < cells; ++c) {
        const double mass = mu.cell_mass(c);
        density[static_cast<std::size_t>(c)] = mass / vol;
        total += mass;
        if (mass > 0.0) positive.push_back(mass / vol);
    }
    if (positive.empty()) throw EmptyMeasure("cannot decompose the zero measure");

    std::sort(positive.begin(), positive.end());
    const double median = positive[positive.size() / 2];
    const double mean = total / mu.box_volume();
    const double reference = std::min(median, mean);

    Decomposition dec;
    dec.threshold_used = density_threshold;
    dec.reference_density = reference;
    dec.ac_density.assign(static_cast<std::size_t>(cells) * mu.channels(), 0.0);
    dec.singular = GridMeasure(mu.dimension(), mu.channels(), mu.grid());
    for (long long c = 0; c < cells; ++c) {
        if (density[static_cast<std::size_t>(c)] > density_threshold * reference) {
            dec.singular.value(c) = mu.value(c);
        } else {
            const auto v = mu.value(c);
            for (int ch = 0; ch < mu.channels(); ++ch)
                dec.ac_density[static_cast<std::size_t>(c) * mu.channels() + ch] = v[ch] / vol;
        }
    }
    return dec;
}

double Decomposition::ac_mass(const GridMeasure& original) const {
    const double vol = original.cell_volume();
    double mass = 0.0;
    const int m = original.channels();
    for (long long c = 0; c < original.cell_count(); ++c) {
        double sq = 0.0;
        for (int ch = 0; ch < m; ++ch) {
            const double g = ac_density[static_cast<std::size_t>(c) * m + ch];
            sq += g * g;
        }
        mass += std::sqrt(sq) * vol;
    }
    return mass;
}

PolarField polar(const GridMeasure& mu, double mass_floor) {
    if (mass_floor <= 0.0) throw DimensionError("mass floor must be positive");
    PolarField field;
    field.m = mu.channels();
    field.mass_floor_used = mass_floor;
    const long long cells = mu.cell_count();
    field.directions.assign(static_cast<std::size_t>(cells) * mu.channels(), 0.0);
    field.present.assign(static_cast<std::size_t>(cells), 0);
    double max_mass = 0.0;
    for (long long c = 0; c < cells; ++c) max_mass = std::max(max_mass, mu.cell_mass(c));
    if (max_mass <= 0.0) return field;
    const double floor = mass_floor * max_mass;
    for (long long c = 0; c < cells; ++c) {
        const double mass = mu.cell_mass(c);
        if (mass >= floor) {
            field.present[static_cast<std::size_t>(c)] = 1;
            Eigen::Map<Eigen::VectorXd>(field.directions.data() + c * mu.channels(),
                                        mu.channels()) = mu.value(c) / mass;
        }
    }
    return field;
}

double ball_mass(const GridMeasure& mu, const Eigen::VectorXd& center, double radius) {
    double mass = 0.0;
    for (long long c = 0; c < mu.cell_count(); ++c) {
        if ((mu.cell_center(c) - center).norm() <= radius) mass += mu.cell_mass(c);
    }
    return mass;
}

GridMeasure blowup(const GridMeasure& mu, const Eigen::VectorXd& x0, double r, int out_cells) {
    const int d = mu.dimension();
    if (x0.size() != d) throw DimensionError("blow-up center must have length d");
    if (r <= 0.0) throw DimensionError("blow-up radius must be positive");
    for (int i = 0; i < d; ++i) {
        if (x0[i] - r < mu.grid().lo[i] || x0[i] + r > mu.grid().hi[i])
            throw DimensionError("ball B_r(x0) must lie inside the box");
    }
    const double norm = ball_mass(mu, x0, r);
    if (norm <= 0.0) throw EmptyMeasure("no mass in the blow-up ball");

    GridParams out_grid;
    out_grid.lo = Eigen::VectorXd::Constant(d, -1.2);
    out_grid.hi = Eigen::VectorXd::Constant(d, 1.2);
    out_grid.cells = out_cells;
    GridMeasure out(d, mu.channels(), out_grid);

    // Splat each source cell footprint (side h/r in blow-up coordinates) onto
    // the output grid with exact per-axis overlap weights.
    const double out_h = out.cell_size(0);
    std::vector<std::pair<int, double>> overlaps[32];
    for (long long c = 0; c < mu.cell_count(); ++c) {
        const double mass = mu.cell_mass(c);
        if (mass <= 0.0) continue;
        const Eigen::VectorXd center = (mu.cell_center(c) - x0) / r;
        bool touches = true;
        for (int i = 0; i < d; ++i) {
            const double half = 0.5 * mu.cell_size(i) / r;
            const double lo = center[i] - half, hi = center[i] + half;
            if (hi < out_grid.lo[i] || lo > out_grid.hi[i]) {
                touches = false;
                break;
            }
            overlaps[i].clear();
            const int j_lo = std::max(0, static_cast<int>(std::floor((lo - out_grid.lo[i]) / out_h)));
            const int j_hi =
                std::min(out_cells - 1, static_cast<int>(std::floor((hi - out_grid.lo[i]) / out_h)));
            for (int j = j_lo; j <= j_hi; ++j) {
                const double cell_lo = out_grid.lo[i] + j * out_h;
                const double w = std::max(0.0, std::min(hi, cell_lo + out_h) - std::max(lo, cell_lo));
                if (w > 0.0) overlaps[i].push_back({j, w / (hi - lo)});
            }
            if (overlaps[i].empty()) {
                touches = false;
                break;
            }
        }
        if (!touches) continue;
        // Tensor-product deposit over per-axis overlaps.
        std::vector<std::size_t> pick(static_cast<std::size_t>(d), 0);
        while (true) {
            double w = 1.0;
            std::vector<int> idx(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) {
                const auto& [j, wi] = overlaps[i][pick[static_cast<std::size_t>(i)]];
                idx[static_cast<std::size_t>(i)] = j;
                w *= wi;
            }
            out.value(out.flat_index(idx)) += (w / norm) * mu.value(c);
            int axis = d - 1;
            while (axis >= 0 && ++pick[static_cast<std::size_t>(axis)] >=
                                    overlaps[axis].size()) {
                pick[static_cast<std::size_t>(axis)] = 0;
                --axis;
            }
            if (axis < 0) break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Weak-form residual
// ---------------------------------------------------------------------------

namespace {

// Per-axis factor (1 - t^2)^q on |t| <= 1 with analytic derivatives, as a
// polynomial in t differentiated coefficient-wise.
struct AxisBump {
    double center = 0.0;
    double halfwidth = 1.0;
    std::vector<double> poly;  // coefficients in t

    AxisBump(double c, double w, int q) : center(c), halfwidth(w) {
        poly = {1.0};
        // (1 - t^2)^q
        for (int rep = 0; rep < q; ++rep) {
            std::vector<double> next(poly.size() + 2, 0.0);
            for (std::size_t i = 0; i < poly.size(); ++i) {
                next[i] += poly[i];
                next[i + 2] -= poly[i];
            }
            poly = std::move(next);
        }
    }

    double derivative(int order, double x) const {
        const double t = (x - center) / halfwidth;
        if (std::abs(t) >= 1.0) return 0.0;
        std::vector<double> dcoef = poly;
        for (int rep = 0; rep < order; ++rep) {
            std::vector<double> next(dcoef.size() > 1 ? dcoef.size() - 1 : 1, 0.0);
            for (std::size_t i = 1; i < dcoef.size(); ++i)
                next[i - 1] = dcoef[i] * static_cast<double>(i);
            dcoef = std::move(next);
        }
        double value = 0.0;
        for (std::size_t i = dcoef.size(); i-- > 0;) value = value * t + dcoef[i];
        for (int rep = 0; rep < order; ++rep) value /= halfwidth;
        return value;
    }
};

}  // namespace

double afree_residual(const PdeOperator& op, const GridMeasure& mu, int test_count,
                      std::uint64_t seed) {
    if (op.dimension() != mu.dimension() || op.source_dim() != mu.channels())
        throw DimensionError("operator and measure must agree on (d, m)");
    const int d = op.dimension();
    const int k = op.order();
    const int q = k + 2;
    Rng rng(seed ^ 0xafee5ull);

    // Multi-index list for the C^k norm.
    std::vector<MultiIndex> low_orders;
    {
        std::vector<int> alpha(static_cast<std::size_t>(d), 0);
        std::function<void(int, int)> walk = [&](int axis, int budget) {
            if (axis == d) {
                low_orders.emplace_back(alpha);
                return;
            }
            for (int a = 0; a <= budget; ++a) {
                alpha[static_cast<std::size_t>(axis)] = a;
                walk(axis + 1, budget - a);
            }
            alpha[static_cast<std::size_t>(axis)] = 0;
        };
        walk(0, k);
    }

    double worst = 0.0;
    for (int test = 0; test < test_count; ++test) {
        // Random bump support inside the box, random output direction.
        std::vector<AxisBump> bumps;
        for (int i = 0; i < d; ++i) {
            const double side = mu.grid().hi[i] - mu.grid().lo[i];
            const double w = rng.uniform(0.15, 0.35) * side;
            const double c = rng.uniform(mu.grid().lo[i] + w, mu.grid().hi[i] - w);
            bumps.emplace_back(c, w, q);
        }
        Eigen::VectorXd direction(op.target_dim());
        for (int i = 0; i < op.target_dim(); ++i) direction[i] = rng.normal();
        direction /= direction.norm();

        auto partial = [&](const MultiIndex& alpha, const Eigen::VectorXd& x) {
            double p = 1.0;
            for (int i = 0; i < d; ++i) p *= bumps[static_cast<std::size_t>(i)].derivative(alpha[i], x[i]);
            return p;
        };

        // <A mu, phi> = sum_alpha (-1)^|alpha| sum_cells value . A_alpha^T u d^alpha b(x_c)
        double pairing_value = 0.0;
        for (const auto& [alpha, coeff] : op.terms()) {
            const Eigen::VectorXd pullback = coeff.transpose() * direction;
            const double sign = alpha.order() % 2 == 0 ? 1.0 : -1.0;
            double acc = 0.0;
            for (long long c = 0; c < mu.cell_count(); ++c) {
                const double scalar = partial(alpha, mu.cell_center(c));
                if (scalar != 0.0) acc += scalar * mu.value(c).dot(pullback);
            }
            pairing_value += sign * acc;
        }

        double ck_norm = 0.0;
        for (const auto& alpha : low_orders) {
            for (long long c = 0; c < mu.cell_count(); ++c) {
                ck_norm = std::max(ck_norm, std::abs(partial(alpha, mu.cell_center(c))));
            }
        }
        if (ck_norm <= 0.0) continue;
        worst = std::max(worst, std::abs(pairing_value) / ck_norm);
    }
    return worst;
}

}  // namespace wavecone
