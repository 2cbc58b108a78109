#pragma once

#include "tsvf/joint_state.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tsvf {

enum class ElementKind { Mixer, Phase, Swap, Absorber, Router };

/// One circuit element. Steps are sets of elements acting on pairwise
/// disjoint rails, so elements within a step commute.
///
///   Mixer on ordered rails (a, b): the 2×2 block
///       [ t      r·e^{iφ} ]
///       [ -r·e^{-iφ}  t   ]
///   with r = sqrt(1 - t²), t ∈ [0, 1], φ = `phase`. With φ = 0 this is the
///   real rotation convention: feeding the second rail splits with both
///   output amplitudes positive.
///
///   Phase: multiplies one rail by e^{iθ} (θ = `phase`).
///   Swap: exchanges two rail amplitudes.
///   Absorber: measurement-semantics collapse at its step (see evolve).
///   Router: flips probe branch `probe_branch` from flag T to R on the
///   subspace where the system occupies `rail_a`; identity on the system.
///   `observed_slice` names the slice whose occupation is interrogated and
///   must equal the input slice of the step containing the router.
struct Element {
    ElementKind kind = ElementKind::Mixer;
    std::string rail_a;
    std::string rail_b;          // mixer / swap second rail
    double transmission = 0.0;   // mixer t
    double phase = 0.0;          // mixer φ or phase θ
    int probe_branch = 0;        // router, 1-based
    int observed_slice = -1;     // router

    friend bool operator==(const Element& x, const Element& y) {
        return x.kind == y.kind && x.rail_a == y.rail_a && x.rail_b == y.rail_b &&
               x.transmission == y.transmission && x.phase == y.phase &&
               x.probe_branch == y.probe_branch && x.observed_slice == y.observed_slice;
    }
};

Element make_mixer(std::string rail_a, std::string rail_b, double t, double phase = 0.0);
Element make_phase(std::string rail, double angle);
Element make_swap(std::string rail_a, std::string rail_b);
Element make_absorber(std::string rail);
Element make_router(std::string rail, int probe_branch, int observed_slice);

/// Probe photon: `branches` orthogonal wavepackets, each carrying a
/// two-valued flag (T = passed an unoccupied location, R = reflected by
/// the particle). Amplitudes are the initial branch weights; every branch
/// starts with flag T.
struct ProbeConfig {
    int branches = 0;
    std::vector<Amplitude> amps;

    bool declared() const { return branches > 0; }

    friend bool operator==(const ProbeConfig& a, const ProbeConfig& b) {
        return a.branches == b.branches && a.amps == b.amps;
    }
};

/// Probe basis with labels "1T", "1R", "2T", "2R", ... in branch order.
BasisPtr probe_basis(const ProbeConfig& probe);

/// Initial probe state Σ_k amps[k]·|kT⟩.
StateVector initial_probe_state(const ProbeConfig& probe);

/// Time-sliced optical circuit over a fixed rail set. steps[i] maps slice i
/// to slice i+1; slice 0 holds the pre-selected state and slice S = steps
/// count holds the final state read by the detectors.
struct Circuit {
    BasisPtr rails;
    std::vector<std::vector<Element>> steps;
    std::map<std::string, std::string> detectors; // detector name -> rail
    StateVector preselect;
    StateVector postselect;
    ProbeConfig probe;

    std::size_t num_slices() const { return steps.size(); }
};

struct ValidationIssue {
    std::string message;
};

/// Checks rail disjointness per step, unitarity of every compiled step,
/// unit-norm boundary states, detector/element rail existence, mixer
/// normalization, router wiring. Reports all failures, never throws.
std::vector<ValidationIssue> validate(const Circuit& c);

/// Block unitary of one step: identity on untouched rails, flagged unitary.
/// Absorbers and routers contribute identity here; their non-unitary /
/// probe-side action is handled by the evolution functions.
Operator compile_step(const std::vector<Element>& step, const BasisPtr& rails);

/// Forward and backward state per slice. backward[k] stores the
/// backward-evolving state as a ket; its conjugate is the bra ⟨φ(k)|.
/// Absorber steps apply the survival projection (I - Π_rail) to both
/// directions without renormalizing, so norms shrink by the absorbed
/// amplitude and inner(backward[k], forward[k]) is slice-independent only
/// for absorber-free circuits.
struct EvolutionTrace {
    std::shared_ptr<const Circuit> circuit;
    std::vector<StateVector> forward;  // slices 0..S
    std::vector<StateVector> backward; // slices 0..S

    std::size_t num_slices() const { return forward.empty() ? 0 : forward.size() - 1; }
};

std::vector<StateVector> evolve_forward(const Circuit& c);
std::vector<StateVector> evolve_backward(const Circuit& c);

/// Runs both directions; throws structural_error when validate() fails.
EvolutionTrace evolve(const Circuit& c);
EvolutionTrace evolve(std::shared_ptr<const Circuit> c);

/// Applies step `index` (unitary part plus absorber projections) to a
/// state sitting at slice `index`, yielding the slice `index`+1 state.
StateVector advance_one_step(const Circuit& c, std::size_t index, StateVector state);

/// Measurement branching at an absorber. Probabilities are conditional on
/// reaching `slice` and sum to 1. The survived branch continues with the
/// renormalized (I - Π_rail) state and keeps the regular backward trace;
/// the absorbed branch is post-selected on the absorber click itself: its
/// forward state collapses to the absorber rail and stays put afterwards,
/// and its backward states pull the click projector back to earlier slices.
struct AbsorberBranch {
    double probability = 0.0;
    EvolutionTrace trace;
};

struct AbsorberBranches {
    AbsorberBranch absorbed;
    AbsorberBranch survived;
};

AbsorberBranches branch_on_absorber(const Circuit& c, std::size_t slice, std::string_view rail);

/// Joint system ⊗ probe evolution. Router elements become controlled flag
/// flips Π_rail ⊗ X_k + (I - Π_rail) ⊗ I; everything else acts as
/// (step unitary) ⊗ I. Requires a declared probe.
struct JointTrace {
    std::shared_ptr<const Circuit> circuit;
    std::vector<JointState> slices; // 0..S
};

JointTrace evolve_joint(const Circuit& c);

} // namespace tsvf
