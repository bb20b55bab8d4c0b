#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "wavecone/errors.hpp"

namespace wavecone {

/// Derivative multi-index alpha = (a_1, ..., a_d), entries >= 0.
class MultiIndex {
public:
    MultiIndex() = default;

    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
        for (int a : entries_) {
            if (a < 0) throw DimensionError("MultiIndex entries must be non-negative");
        }
    }

    static MultiIndex zero(int d) { return MultiIndex(std::vector<int>(d, 0)); }

    /// Unit index e_axis in dimension d (a single first derivative).
    static MultiIndex unit(int d, int axis) {
        std::vector<int> e(d, 0);
        e.at(static_cast<std::size_t>(axis)) = 1;
        return MultiIndex(std::move(e));
    }

    int dimension() const { return static_cast<int>(entries_.size()); }

    /// |alpha| = sum of entries.
    int order() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

    int operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }

    const std::vector<int>& entries() const { return entries_; }

    // Lexicographic order on entries; used as the canonical term order.
    auto operator<=>(const MultiIndex&) const = default;

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(entries_[i]);
        }
        return s + ")";
    }

private:
    std::vector<int> entries_;
};

}  // namespace wavecone
