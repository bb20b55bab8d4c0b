#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wavecone {

/// Fixed-format double for reports: deterministic, locale-independent.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string fmt_vector(const Eigen::VectorXd& v, const char* sep = ",") {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += fmt_double(v[i]);
    }
    return s;
}

/// Splits "1,0,-2.5" or whitespace-separated numbers into a vector.
Eigen::VectorXd parse_numbers(const std::string& text);

}  // namespace wavecone
