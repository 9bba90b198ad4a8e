#pragma once

// The success measure: returns of the final generation after G
// generations of budget T, against a single lifetime of budget G*T, on
// held-out instances with matched seeds. Success means a positive
// seed-mean margin; the one-sided sign test is reported alongside.

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <vector>

#include "lineage/errors.hpp"

namespace lineage {

// One-sided sign test: P(X >= wins) for X ~ Binomial(n, 1/2), with zero
// margins dropped. Returns 1.0 when nothing is left to test.
inline double sign_test_p(const std::vector<double>& margins) {
    int n = 0, wins = 0;
    for (double m : margins) {
        if (m == 0.0) continue;
        ++n;
        if (m > 0.0) ++wins;
    }
    if (n == 0) return 1.0;
    double p = 0.0;
    double log_half_n = -static_cast<double>(n) * std::log(2.0);
    for (int k = wins; k <= n; ++k) {
        double log_comb = 0.0;
        for (int j = 0; j < k; ++j)
            log_comb += std::log(static_cast<double>(n - j)) - std::log(static_cast<double>(j + 1));
        p += std::exp(log_comb + log_half_n);
    }
    return std::min(p, 1.0);
}

struct SuccessReport {
    std::vector<std::uint64_t> seeds;
    std::vector<double> accumulation;
    std::vector<double> baseline;
    std::vector<double> margins;
    double mean_margin = 0.0;
    double p_value = 1.0;
    bool success = false;

    std::string to_string() const {
        std::ostringstream out;
        out << "seeds=" << seeds.size() << " mean_margin=" << mean_margin << " sign_test_p=" << p_value
            << " success=" << (success ? "true" : "false") << "\n";
        for (std::size_t i = 0; i < seeds.size(); ++i)
            out << "  seed " << seeds[i] << ": accumulation=" << accumulation[i]
                << " baseline=" << baseline[i] << " margin=" << margins[i] << "\n";
        return out.str();
    }
};

inline SuccessReport success_measure(const std::map<std::uint64_t, double>& accum_by_seed,
                                     const std::map<std::uint64_t, double>& baseline_by_seed) {
    if (accum_by_seed.size() != baseline_by_seed.size())
        throw ConfigError("success_measure: seed sets differ in size");
    SuccessReport report;
    for (const auto& [seed, value] : accum_by_seed) {
        const auto it = baseline_by_seed.find(seed);
        if (it == baseline_by_seed.end())
            throw ConfigError("success_measure: seed sets do not match");
        report.seeds.push_back(seed);
        report.accumulation.push_back(value);
        report.baseline.push_back(it->second);
        report.margins.push_back(value - it->second);
        report.mean_margin += value - it->second;
    }
    report.mean_margin /= static_cast<double>(report.margins.size());
    report.p_value = sign_test_p(report.margins);
    report.success = report.mean_margin > 0.0;
    return report;
}

}  // namespace lineage
