#include "wavecone/verify.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wavecone/text_util.hpp"

namespace wavecone {

namespace {

// Quantized key so cells sharing the same polar direction (the typical case
// for flat singular sets) run the sphere search once.
std::vector<long long> polar_key(const Eigen::VectorXd& v) {
    std::vector<long long> key(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        key[static_cast<std::size_t>(i)] = std::llround(v[i] * 1e12);
    return key;
}

}  // namespace

VerificationReport verify_polar_in_cone(const PdeOperator& op, const GridMeasure& mu,
                                        const VerifyParams& params) {
    if (op.dimension() != mu.dimension() || op.source_dim() != mu.channels())
        throw DimensionError("operator and measure must agree on (d, m)");

    VerificationReport report;
    report.operator_label = op.label();
    report.afree_residual = afree_residual(op, mu, params.afree_tests, params.seed);
    double max_h = 0.0;
    for (int i = 0; i < mu.dimension(); ++i) max_h = std::max(max_h, mu.cell_size(i));
    report.afree_gate = 10.0 * max_h;
    report.afree_gate_passed = report.afree_residual <= report.afree_gate;
    report.total_mass = mu.total_variation();

    const Decomposition dec = lebesgue_decompose(mu, params.density_threshold);
    report.singular_mass = dec.singular_mass();
    report.ac_mass = report.total_mass - report.singular_mass;

    const PolarField field = polar(dec.singular, params.mass_floor);

    // Gather singular cells and deduplicate polar directions.
    std::map<std::vector<long long>, int> key_to_slot;
    std::vector<Eigen::VectorXd> distinct;
    struct CellEntry {
        long long cell;
        double mass;
        int slot;
    };
    std::vector<CellEntry> entries;
    for (long long c = 0; c < dec.singular.cell_count(); ++c) {
        const double mass = dec.singular.cell_mass(c);
        if (mass <= 0.0 || !field.has(c)) continue;
        const Eigen::VectorXd dir = field.at(c);
        const auto key = polar_key(dir);
        auto [it, inserted] = key_to_slot.emplace(key, static_cast<int>(distinct.size()));
        if (inserted) distinct.push_back(dir);
        entries.push_back({c, mass, it->second});
    }
    report.singular_cells = static_cast<long long>(entries.size());
    report.distinct_polars = static_cast<long long>(distinct.size());

    std::vector<ConeVerdict> verdicts(distinct.size());
    const int threads = std::max(1, params.threads);
    if (threads == 1 || distinct.size() < 2) {
        for (std::size_t i = 0; i < distinct.size(); ++i)
            verdicts[i] = in_wave_cone(op, distinct[i], params.cone_tol, params.sampling);
    } else {
        // Independent per-slot work merged by index, so the thread count never
        // changes the result.
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < distinct.size();
                     i = next.fetch_add(1)) {
                    verdicts[i] = in_wave_cone(op, distinct[i], params.cone_tol, params.sampling);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    double member_mass = 0.0, tested_mass = 0.0, worst = 0.0;
    for (const auto& entry : entries) {
        const ConeVerdict& verdict = verdicts[static_cast<std::size_t>(entry.slot)];
        tested_mass += entry.mass;
        if (verdict.member) member_mass += entry.mass;
        worst = std::max(worst, verdict.residual);
    }
    report.worst_polar_residual = worst;
    if (tested_mass > 0.0) report.mass_fraction_in_cone = member_mass / tested_mass;

    if (!params.per_cell_csv.empty()) {
        std::ofstream out(params.per_cell_csv, std::ios::binary);
        if (!out) throw Error("cannot write report CSV: " + params.per_cell_csv);
        out << "# operator=" << report.operator_label
            << " afree_residual=" << fmt_double(report.afree_residual)
            << " afree_gate=" << fmt_double(report.afree_gate)
            << " threshold=" << fmt_double(params.density_threshold)
            << " cone_tol=" << fmt_double(params.cone_tol) << "\n";
        out << "cell,mass,member,residual";
        for (int i = 0; i < mu.channels(); ++i) out << ",polar" << i;
        out << "\n";
        for (const auto& entry : entries) {
            const ConeVerdict& verdict = verdicts[static_cast<std::size_t>(entry.slot)];
            out << entry.cell << "," << fmt_double(entry.mass) << ","
                << (verdict.member ? 1 : 0) << "," << fmt_double(verdict.residual);
            const Eigen::VectorXd dir = field.at(entry.cell);
            for (int i = 0; i < mu.channels(); ++i) out << "," << fmt_double(dir[i]);
            out << "\n";
        }
        report.per_cell_csv = params.per_cell_csv;
    }
    return report;
}

std::string VerificationReport::to_text() const {
    std::ostringstream out;
    out << "operator:             " << operator_label << "\n";
    out << "afree_residual:       " << fmt_double(afree_residual) << (afree_gate_passed ? "" : "  [above gate]")
        << "\n";
    out << "afree_gate:           " << fmt_double(afree_gate) << "\n";
    out << "total_mass:           " << fmt_double(total_mass) << "\n";
    out << "singular_mass:        " << fmt_double(singular_mass) << "\n";
    out << "ac_mass:              " << fmt_double(ac_mass) << "\n";
    out << "singular_cells:       " << singular_cells << "\n";
    out << "distinct_polars:      " << distinct_polars << "\n";
    if (mass_fraction_in_cone)
        out << "mass_fraction_in_cone: " << fmt_double(*mass_fraction_in_cone) << "\n";
    else
        out << "mass_fraction_in_cone: n/a (no singular mass)\n";
    out << "worst_polar_residual: " << fmt_double(worst_polar_residual) << "\n";
    if (!per_cell_csv.empty()) out << "per_cell_csv:         " << per_cell_csv << "\n";
    return out.str();
}

std::string VerificationReport::to_json() const {
    nlohmann::ordered_json j;
    j["operator"] = operator_label;
    j["afree_residual"] = afree_residual;
    j["afree_gate"] = afree_gate;
    j["afree_gate_passed"] = afree_gate_passed;
    j["total_mass"] = total_mass;
    j["singular_mass"] = singular_mass;
    j["ac_mass"] = ac_mass;
    j["singular_cells"] = singular_cells;
    j["distinct_polars"] = distinct_polars;
    if (mass_fraction_in_cone)
        j["mass_fraction_in_cone"] = *mass_fraction_in_cone;
    else
        j["mass_fraction_in_cone"] = nullptr;
    j["worst_polar_residual"] = worst_polar_residual;
    j["per_cell_csv"] = per_cell_csv;
    return j.dump(2) + "\n";
}

}  // namespace wavecone
