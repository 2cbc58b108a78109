#pragma once

#include "tsvf/two_state.hpp"

#include <cstdint>
#include <optional>

namespace tsvf {

/// Gaussian pointer: initial wavefunction G(x) ∝ exp(-x²/4σ²) (position
/// variance σ²), coupled so that the pointer translates by g on the
/// projector's subspace. The optional grid backs the numeric sampling path
/// and must span at least [-6σ, 6σ+g].
struct PointerConfig {
    double g = 0.0;
    double sigma = 1.0;

    struct Grid {
        double x_min = 0.0;
        double x_max = 0.0;
        std::size_t n_points = 0;
    };
    std::optional<Grid> grid;

    /// Supplied grid, or the default [-8σ, 8σ+g] with 2^14 points.
    Grid effective_grid() const;
};

/// Exact post-selected pointer statistics. The conditional pointer
/// wavefunction is c0·G(x) + c1·G(x-g) with c0 = ⟨φ|(I-P)|ψ⟩ and
/// c1 = ⟨φ|P|ψ⟩; mean and variance follow in closed form through the
/// Gaussian overlap factor exp(-g²/8σ²). As g → 0, mean/g tends to
/// Re(c1/(c0+c1)), the real part of the weak value.
struct PointerOutcome {
    Amplitude c0{};
    Amplitude c1{};
    double mean = 0.0;
    double variance = 0.0;
    double success_probability = 0.0; // squared norm of the post-selected joint state
};

PointerOutcome weak_pointer_state(const TwoState& ts, const Operator& projector,
                                  const PointerConfig& cfg);

/// Re of the weak value of `projector`; the g → 0 limit of mean/g.
double analytic_weak_limit(const TwoState& ts, const Operator& projector);

struct TrialRecord {
    std::uint64_t trial = 0;
    bool postselected = false;
    double reading = 0.0; // defined only when postselected
};

struct MonteCarloReport {
    std::uint64_t n_attempted = 0;
    std::uint64_t n_postselected = 0;
    double sample_mean = 0.0;
    double std_error = 0.0;
    std::vector<TrialRecord> trials;
};

/// Repeated weak-measurement trials. Each trial flips a Bernoulli coin with
/// the exact success probability and, on success, draws a reading from the
/// exact two-Gaussian interference density by inverse CDF on the grid.
/// Per-trial randomness is a counter-based stream keyed by (seed, trial),
/// so identical inputs give byte-identical reports regardless of
/// scheduling.
MonteCarloReport sample_trials(const TwoState& ts, const Operator& projector,
                               const PointerConfig& cfg, std::uint64_t n, std::uint64_t seed);

/// Projective measurement of P at slice k: splits the forward state into
/// found / not-found branches, continues each to the final slice, applies
/// post-selection and combines by Bayes. Matches abl_probability exactly.
struct StrongMeasureResult {
    double p_found = 0.0;               // at slice k, before post-selection
    double p_post_given_found = 0.0;
    double p_post_given_not_found = 0.0;
    double p_found_given_post = 0.0;
    std::optional<EvolutionTrace> found_branch;
    std::optional<EvolutionTrace> not_found_branch;
};

StrongMeasureResult strong_measure(const EvolutionTrace& trace, std::size_t k,
                                   const Operator& projector);

} // namespace tsvf
