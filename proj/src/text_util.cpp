#include "wavecone/text_util.hpp"

#include <sstream>

#include "wavecone/errors.hpp"

namespace wavecone {

Eigen::VectorXd parse_numbers(const std::string& text) {
    std::string normalized = text;
    for (char& c : normalized) {
        if (c == ',' || c == ';' || c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    std::istringstream in(normalized);
    std::vector<double> numbers;
    double v;
    while (in >> v) numbers.push_back(v);
    if (!in.eof()) throw ParseError("could not parse number list: " + text);
    if (numbers.empty()) throw ParseError("empty number list");
    Eigen::VectorXd out(static_cast<Eigen::Index>(numbers.size()));
    for (std::size_t i = 0; i < numbers.size(); ++i) out[static_cast<Eigen::Index>(i)] = numbers[i];
    return out;
}

}  // namespace wavecone
