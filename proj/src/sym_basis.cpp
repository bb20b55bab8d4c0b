#include "wavecone/sym_basis.hpp"

#include <algorithm>
#include <cmath>

namespace wavecone {

int sym_channel_count(int d) { return d * (d + 1) / 2; }

int sym_pair_index(int d, int p, int q) {
    if (p > q) std::swap(p, q);
    if (p < 0 || q >= d) throw DimensionError("pair index out of range");
    // Pairs (0,0)..(0,d-1), (1,1)..(1,d-1), ...
    return p * d - p * (p - 1) / 2 + (q - p);
}

double sym_entry_weight(int p, int q) { return p == q ? 1.0 : 1.0 / std::sqrt(2.0); }

Eigen::VectorXd sym_flatten(const Eigen::MatrixXd& m) {
    const int d = static_cast<int>(m.rows());
    if (m.cols() != d) throw DimensionError("sym_flatten needs a square matrix");
    Eigen::VectorXd c(sym_channel_count(d));
    for (int p = 0; p < d; ++p) {
        for (int q = p; q < d; ++q) {
            const double value = 0.5 * (m(p, q) + m(q, p));
            c[sym_pair_index(d, p, q)] = (p == q) ? value : std::sqrt(2.0) * value;
        }
    }
    return c;
}

Eigen::MatrixXd sym_unflatten(const Eigen::VectorXd& c, int d) {
    if (c.size() != sym_channel_count(d)) throw DimensionError("wrong channel count");
    Eigen::MatrixXd m(d, d);
    for (int p = 0; p < d; ++p) {
        for (int q = p; q < d; ++q) {
            const double entry = sym_entry_weight(p, q) * c[sym_pair_index(d, p, q)];
            m(p, q) = entry;
            m(q, p) = entry;
        }
    }
    return m;
}

namespace {

long long factorial(int n) {
    long long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

MultisetBasis::MultisetBasis(int d, int r) : d_(d), r_(r) {
    if (d < 1 || r < 0) throw DimensionError("MultisetBasis needs d >= 1, r >= 0");
    std::vector<int> current(static_cast<std::size_t>(r), 0);
    if (r == 0) {
        tuples_.push_back({});
        mult_.push_back(1);
        return;
    }
    while (true) {
        tuples_.push_back(current);
        long long m = factorial(r);
        int run = 1;
        for (int i = 1; i < r; ++i) {
            if (current[static_cast<std::size_t>(i)] == current[static_cast<std::size_t>(i - 1)])
                ++run;
            else {
                m /= factorial(run);
                run = 1;
            }
        }
        m /= factorial(run);
        mult_.push_back(m);

        int pos = r - 1;
        while (pos >= 0 && current[static_cast<std::size_t>(pos)] == d - 1) --pos;
        if (pos < 0) break;
        const int next = current[static_cast<std::size_t>(pos)] + 1;
        for (int i = pos; i < r; ++i) current[static_cast<std::size_t>(i)] = next;
    }
}

int MultisetBasis::index_of(std::vector<int> tuple) const {
    if (static_cast<int>(tuple.size()) != r_) return -1;
    std::sort(tuple.begin(), tuple.end());
    for (int t : tuple)
        if (t < 0 || t >= d_) return -1;
    const auto it = std::lower_bound(tuples_.begin(), tuples_.end(), tuple);
    if (it == tuples_.end() || *it != tuple) return -1;
    return static_cast<int>(it - tuples_.begin());
}

Eigen::VectorXd sym_power_channels(const MultisetBasis& basis, const Eigen::VectorXd& xi) {
    if (xi.size() != basis.dimension()) throw DimensionError("xi length must match basis dimension");
    Eigen::VectorXd c(basis.size());
    for (int i = 0; i < basis.size(); ++i) {
        double prod = 1.0;
        for (int axis : basis.tuple(i)) prod *= xi[axis];
        c[i] = std::sqrt(static_cast<double>(basis.multiplicity(i))) * prod;
    }
    return c;
}

}  // namespace wavecone
