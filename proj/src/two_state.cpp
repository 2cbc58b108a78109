#include "tsvf/two_state.hpp"

#include <cmath>

namespace tsvf {

TwoState two_state_at(const EvolutionTrace& trace, std::size_t k) {
    if (trace.forward.empty() || k >= trace.forward.size()) {
        throw structural_error("slice " + std::to_string(k) + " out of range");
    }
    TwoState ts;
    ts.slice = k;
    ts.bra = trace.backward[k];
    ts.ket = trace.forward[k];
    ts.overlap = inner(ts.bra, ts.ket);
    if (std::abs(ts.overlap) <= kOverlapEpsilon) {
        throw null_postselection_error("backward and forward states are orthogonal at slice " +
                                       std::to_string(k) + "; weak values are undefined");
    }
    return ts;
}

WeakValue weak_value(const TwoState& ts, const Operator& op, std::string_view id) {
    if (std::abs(ts.overlap) <= kOverlapEpsilon) {
        throw null_postselection_error("two-state overlap is null");
    }
    WeakValue wv;
    wv.value = inner(ts.bra, apply(op, ts.ket)) / ts.overlap;
    wv.operator_id = std::string(id);
    wv.slice = ts.slice;
    return wv;
}

std::vector<std::pair<std::string, WeakValue>> projector_weak_values(const TwoState& ts) {
    std::vector<std::pair<std::string, WeakValue>> out;
    const BasisPtr& basis = ts.ket.basis();
    out.reserve(basis->size());
    for (std::size_t i = 0; i < basis->size(); ++i) {
        WeakValue wv;
        wv.value = std::conj(ts.bra[i]) * ts.ket[i] / ts.overlap;
        wv.operator_id = "proj:" + basis->label(i);
        wv.slice = ts.slice;
        out.emplace_back(basis->label(i), std::move(wv));
    }
    return out;
}

double postselection_probability(const EvolutionTrace& trace) {
    if (trace.forward.empty()) throw structural_error("empty trace");
    return std::norm(inner(trace.circuit->postselect, trace.forward.back()));
}

double abl_probability(const EvolutionTrace& trace, std::size_t k, const Operator& projector) {
    if (trace.forward.empty() || k >= trace.forward.size()) {
        throw structural_error("slice " + std::to_string(k) + " out of range");
    }
    if (!projector.is_flagged_projector()) {
        throw structural_error("abl_probability requires a flagged projector");
    }
    const StateVector& phi = trace.backward[k];
    const StateVector& psi = trace.forward[k];
    StateVector projected = apply(projector, psi);
    Amplitude found = inner(phi, projected);
    Amplitude not_found = inner(phi, psi) - found;
    double num = std::norm(found);
    double den = num + std::norm(not_found);
    if (den <= kOverlapEpsilon) {
        throw impossible_history_error(
            "both outcomes of the projective measurement have vanishing post-selection amplitude");
    }
    return num / den;
}

} // namespace tsvf
