#pragma once

#include <stdexcept>
#include <string>

namespace tsvf {

/// Contract violation in library usage: basis mismatch, bad dimensions,
/// malformed circuit structure, out-of-range indices.
struct structural_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The backward and forward states are (numerically) orthogonal at the
/// requested slice; weak values are undefined there.
struct null_postselection_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Conditioning on an event of zero probability: both measurement branches
/// have vanishing post-selection amplitude.
struct impossible_history_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tsvf
