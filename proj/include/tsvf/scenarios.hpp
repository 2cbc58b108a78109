#pragma once

#include "tsvf/two_state.hpp"

#include <functional>
#include <optional>

namespace tsvf {

/// Symbol → (rail, slice). Rail-less labels name a slice only (time marks
/// like t1..t4); railed labels name an arm of the interferometer.
struct SliceLabel {
    std::string symbol;
    std::optional<std::string> rail;
    std::size_t slice = 0;

    friend bool operator==(const SliceLabel& a, const SliceLabel& b) {
        return a.symbol == b.symbol && a.rail == b.rail && a.slice == b.slice;
    }
};

enum class ExpectKind {
    WeakValue,       // weak value of the rail projector at a slice
    Overlap,         // ⟨φ|ψ⟩ at a slice
    PostselectProb,  // |⟨postselect|forward[S]⟩|²
    Abl,             // ABL probability of the rail projector at a slice
    ProbeFidelity,   // joint-evolved conditional probe vs factorized prediction
    ProbeMatch,      // projection of the conditional probe on the flag-pattern state
};

struct Expectation {
    ExpectKind kind = ExpectKind::WeakValue;
    std::string rail;      // empty where not applicable
    std::size_t slice = 0; // ignored for PostselectProb / probe kinds
    Amplitude value{};
    std::string note;

    friend bool operator==(const Expectation& a, const Expectation& b) {
        return a.kind == b.kind && a.rail == b.rail && a.slice == b.slice &&
               a.value == b.value && a.note == b.note;
    }
};

/// A pre-verified experiment: circuit, named arms/times, and the table of
/// expected values re-derived from first principles by self_check.
struct Scenario {
    std::string name;
    Circuit circuit;
    std::vector<SliceLabel> labels;
    std::vector<Expectation> expected;

    const SliceLabel* find_label(std::string_view symbol) const;
};

struct ResolvedAt {
    std::optional<std::string> rail;
    std::size_t slice = 0;
};

/// Resolves "--at"-style tokens: a bare slice number, "rail@slice",
/// "@slice", or a label symbol.
std::optional<ResolvedAt> resolve_at(const Scenario& s, std::string_view token);

struct CheckLine {
    std::string description;
    bool passed = false;
    std::string detail; // got vs want on failure
};

/// Re-derives every expectation from the evolved trace (and the joint
/// trace for probe expectations) and compares at `tol`. Golden values are
/// never trusted blindly.
std::vector<CheckLine> self_check(const Scenario& s, double tol = 1e-9);

/// Canonical scenarios. Constructors validate the circuit and run
/// self_check; they throw structural_error if either fails.
Scenario single_bs_split();
Scenario nested_mzi();
Scenario three_box_cycle();
Scenario shutter_probe();
Scenario shutter_probe(const std::vector<Amplitude>& branch_amps);
Scenario ifm();

struct BuiltinScenario {
    std::string name;
    std::string brief;
    std::function<Scenario()> construct;
};

const std::vector<BuiltinScenario>& builtin_scenarios();

/// Field-by-field equality after canonical ordering of steps, labels and
/// expectations. Amplitudes compare exactly.
bool scenario_equal(const Scenario& a, const Scenario& b);

/// Canonically sorts step elements, labels and expectations in place.
void canonicalize(Scenario& s);

} // namespace tsvf
