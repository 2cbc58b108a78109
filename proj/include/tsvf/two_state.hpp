#pragma once

#include "tsvf/circuit.hpp"

namespace tsvf {

/// Strictest magnitude of ⟨φ|ψ⟩ still accepted for conditional quantities.
/// Below this the post-selection is treated as null: weak values diverge
/// and downstream statistics are meaningless, so it is an error, not a
/// warning.
inline constexpr double kOverlapEpsilon = 1e-12;

/// The pair (backward bra, forward ket) at one slice, plus their overlap.
struct TwoState {
    std::size_t slice = 0;
    StateVector bra; // backward-evolving state as a ket; conj gives ⟨φ|
    StateVector ket; // forward-evolving state |ψ⟩
    Amplitude overlap{};
};

/// Packages backward[k], forward[k] and ⟨φ_k|ψ_k⟩. Throws
/// null_postselection_error when |overlap| ≤ kOverlapEpsilon.
TwoState two_state_at(const EvolutionTrace& trace, std::size_t k);

struct WeakValue {
    Amplitude value{};
    std::string operator_id;
    std::size_t slice = 0;
};

/// ⟨φ|A|ψ⟩ / ⟨φ|ψ⟩. Anomalous results (negative, above one, complex) are
/// legitimate values, not errors.
WeakValue weak_value(const TwoState& ts, const Operator& op, std::string_view id = "");

/// One weak value per rail projector, in basis order. Their sum is 1.
std::vector<std::pair<std::string, WeakValue>> projector_weak_values(const TwoState& ts);

/// |⟨postselect|forward[S]⟩|². For circuits with absorbers this is the
/// joint probability of surviving every absorber and passing post-selection.
double postselection_probability(const EvolutionTrace& trace);

/// Probability that a projective binary measurement of P at slice k yields
/// "found", conditioned on both boundary selections:
///     |⟨φ_k|P|ψ_k⟩|² / (|⟨φ_k|P|ψ_k⟩|² + |⟨φ_k|(I-P)|ψ_k⟩|²).
/// P must be flagged projector. Throws impossible_history_error when the
/// denominator vanishes.
double abl_probability(const EvolutionTrace& trace, std::size_t k, const Operator& projector);

} // namespace tsvf
