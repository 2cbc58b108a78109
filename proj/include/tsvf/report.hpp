#pragma once

#include "tsvf/pointer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tsvf {

// Machine-readable run report. Field order and number formatting are fixed
// (12 significant digits) so identical inputs produce byte-identical
// output; weak-value components with magnitude below 1e-10 print as exact
// 0 for golden-file stability.

struct WeakRow {
    std::string rail;
    std::size_t slice = 0;
    double re = 0.0;
    double im = 0.0;
};

struct AblRow {
    std::string rail;
    std::size_t slice = 0;
    double probability = 0.0;
};

struct PointerSection {
    std::string rail;
    std::size_t slice = 0;
    double g = 0.0;
    double sigma = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double success_probability = 0.0;
    double weak_re = 0.0;
    double weak_im = 0.0;
};

struct MonteCarloSection {
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t n_postselected = 0;
    double sample_mean = 0.0;
    double std_error = 0.0;
    bool accepted = false; // |sample_mean - analytic mean| ≤ 5·std_error
    std::optional<std::string> samples_path;
};

struct Report {
    std::string scenario;
    double postselection_probability = 0.0;
    std::vector<WeakRow> weak_values;
    std::vector<AblRow> abl;
    std::optional<PointerSection> pointer;
    std::optional<MonteCarloSection> montecarlo;
};

std::string to_json(const Report& report);

/// CSV sample stream: header "trial,reading,postselected"; failed trials
/// keep their row with an empty reading field.
std::string samples_csv(const MonteCarloReport& mc);

} // namespace tsvf
