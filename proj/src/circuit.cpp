#include "tsvf/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tsvf {

Element make_mixer(std::string rail_a, std::string rail_b, double t, double phase) {
    Element e;
    e.kind = ElementKind::Mixer;
    e.rail_a = std::move(rail_a);
    e.rail_b = std::move(rail_b);
    e.transmission = t;
    e.phase = phase;
    return e;
}

Element make_phase(std::string rail, double angle) {
    Element e;
    e.kind = ElementKind::Phase;
    e.rail_a = std::move(rail);
    e.phase = angle;
    return e;
}

Element make_swap(std::string rail_a, std::string rail_b) {
    Element e;
    e.kind = ElementKind::Swap;
    e.rail_a = std::move(rail_a);
    e.rail_b = std::move(rail_b);
    return e;
}

Element make_absorber(std::string rail) {
    Element e;
    e.kind = ElementKind::Absorber;
    e.rail_a = std::move(rail);
    return e;
}

Element make_router(std::string rail, int probe_branch, int observed_slice) {
    Element e;
    e.kind = ElementKind::Router;
    e.rail_a = std::move(rail);
    e.probe_branch = probe_branch;
    e.observed_slice = observed_slice;
    return e;
}

BasisPtr probe_basis(const ProbeConfig& probe) {
    if (!probe.declared()) throw structural_error("no probe declared");
    std::vector<std::string> labels;
    labels.reserve(2 * static_cast<std::size_t>(probe.branches));
    for (int k = 1; k <= probe.branches; ++k) {
        labels.push_back(std::to_string(k) + "T");
        labels.push_back(std::to_string(k) + "R");
    }
    return make_basis(std::move(labels));
}

StateVector initial_probe_state(const ProbeConfig& probe) {
    BasisPtr basis = probe_basis(probe);
    std::vector<Amplitude> amps(basis->size());
    for (int k = 0; k < probe.branches; ++k) {
        amps[2 * static_cast<std::size_t>(k)] = probe.amps.at(static_cast<std::size_t>(k));
    }
    return StateVector(basis, std::move(amps));
}

namespace {

std::vector<std::string> element_rails(const Element& e) {
    switch (e.kind) {
        case ElementKind::Mixer:
        case ElementKind::Swap:
            return {e.rail_a, e.rail_b};
        default:
            return {e.rail_a};
    }
}

const char* kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::Mixer: return "bs";
        case ElementKind::Phase: return "phase";
        case ElementKind::Swap: return "swap";
        case ElementKind::Absorber: return "absorb";
        case ElementKind::Router: return "route";
    }
    return "?";
}

} // namespace

std::vector<ValidationIssue> validate(const Circuit& c) {
    std::vector<ValidationIssue> issues;
    auto report = [&issues](std::string msg) { issues.push_back({std::move(msg)}); };

    if (!c.rails || c.rails->size() == 0) {
        report("circuit has no rails");
        return issues;
    }

    for (std::size_t i = 0; i < c.steps.size(); ++i) {
        std::set<std::string> used;
        for (const Element& e : c.steps[i]) {
            for (const std::string& r : element_rails(e)) {
                if (!c.rails->contains(r)) {
                    report("step " + std::to_string(i + 1) + ": " + kind_name(e.kind) +
                           " references unknown rail '" + r + "'");
                }
                if (!used.insert(r).second) {
                    report("step " + std::to_string(i + 1) + ": rail '" + r +
                           "' used by more than one element");
                }
            }
            if ((e.kind == ElementKind::Mixer || e.kind == ElementKind::Swap) &&
                e.rail_a == e.rail_b) {
                report("step " + std::to_string(i + 1) + ": " + kind_name(e.kind) +
                       " uses rail '" + e.rail_a + "' twice");
            }
            if (e.kind == ElementKind::Mixer &&
                (!(e.transmission >= 0.0) || e.transmission > 1.0 + kTol)) {
                report("step " + std::to_string(i + 1) + ": mixer transmission " +
                       std::to_string(e.transmission) + " outside [0, 1]");
            }
            if (e.kind == ElementKind::Router) {
                if (!c.probe.declared()) {
                    report("step " + std::to_string(i + 1) + ": router present but no probe declared");
                } else if (e.probe_branch < 1 || e.probe_branch > c.probe.branches) {
                    report("step " + std::to_string(i + 1) + ": router probe branch " +
                           std::to_string(e.probe_branch) + " out of range");
                }
                if (e.observed_slice != static_cast<int>(i)) {
                    report("step " + std::to_string(i + 1) + ": router observes slice " +
                           std::to_string(e.observed_slice) + " but the step reads slice " +
                           std::to_string(i));
                }
            }
        }
    }

    // Each probe branch interacts at most once; the conditional-probe
    // factorization relies on it.
    if (c.probe.declared()) {
        if (c.probe.amps.size() != static_cast<std::size_t>(c.probe.branches)) {
            report("probe declares " + std::to_string(c.probe.branches) + " branches but " +
                   std::to_string(c.probe.amps.size()) + " amplitudes");
        } else {
            double n2 = 0.0;
            for (const auto& a : c.probe.amps) n2 += std::norm(a);
            if (std::abs(n2 - 1.0) > 1e-9) {
                report("probe amplitudes are not normalized (norm² = " + std::to_string(n2) + ")");
            }
        }
        std::set<int> routed;
        for (const auto& step : c.steps) {
            for (const Element& e : step) {
                if (e.kind != ElementKind::Router) continue;
                if (!routed.insert(e.probe_branch).second) {
                    report("probe branch " + std::to_string(e.probe_branch) +
                           " is routed more than once");
                }
            }
        }
    }

    auto check_boundary = [&](const StateVector& s, const char* which) {
        if (s.dim() == 0) {
            report(std::string(which) + " state is missing");
            return;
        }
        if (!same_basis(s.basis(), c.rails)) {
            report(std::string(which) + " state basis does not match the circuit rails");
            return;
        }
        if (std::abs(s.norm() - 1.0) > kTol) {
            report(std::string(which) + " state is not unit-norm");
        }
    };
    check_boundary(c.preselect, "preselect");
    check_boundary(c.postselect, "postselect");

    for (const auto& [name, rail] : c.detectors) {
        if (!c.rails->contains(rail)) {
            report("detector '" + name + "' references unknown rail '" + rail + "'");
        }
    }

    // Compiled-step unitarity; skipped for steps already reported broken.
    if (issues.empty()) {
        for (std::size_t i = 0; i < c.steps.size(); ++i) {
            try {
                compile_step(c.steps[i], c.rails);
            } catch (const structural_error& err) {
                report("step " + std::to_string(i + 1) + ": " + err.what());
            }
        }
    }

    return issues;
}

Operator compile_step(const std::vector<Element>& step, const BasisPtr& rails) {
    Operator u = Operator::identity(rails);
    std::set<std::size_t> used;
    auto claim = [&used, &rails](const std::string& rail) {
        std::size_t i = rails->index_of(rail);
        if (!used.insert(i).second) {
            throw structural_error("rail '" + rail + "' used by more than one element in a step");
        }
        return i;
    };

    for (const Element& e : step) {
        switch (e.kind) {
            case ElementKind::Mixer: {
                std::size_t i = claim(e.rail_a);
                std::size_t j = claim(e.rail_b);
                double t = e.transmission;
                if (!(t >= 0.0) || t > 1.0 + kTol) {
                    throw structural_error("mixer transmission " + std::to_string(t) +
                                           " outside [0, 1]");
                }
                t = std::min(t, 1.0);
                double r = std::sqrt(1.0 - t * t);
                Amplitude off = std::polar(r, e.phase);
                u.set(i, i, t);
                u.set(i, j, off);
                u.set(j, i, -std::conj(off));
                u.set(j, j, t);
                break;
            }
            case ElementKind::Phase: {
                std::size_t i = claim(e.rail_a);
                u.set(i, i, std::polar(1.0, e.phase));
                break;
            }
            case ElementKind::Swap: {
                std::size_t i = claim(e.rail_a);
                std::size_t j = claim(e.rail_b);
                u.set(i, i, 0.0);
                u.set(j, j, 0.0);
                u.set(i, j, 1.0);
                u.set(j, i, 1.0);
                break;
            }
            case ElementKind::Absorber:
            case ElementKind::Router:
                claim(e.rail_a);
                break;
        }
    }
    u.mark_unitary();
    return u;
}

namespace {

StateVector project_out_rail(const StateVector& s, const std::string& rail) {
    std::vector<Amplitude> amps = s.amplitudes();
    amps[s.basis()->index_of(rail)] = Amplitude{};
    return StateVector(s.basis(), std::move(amps));
}

void require_valid(const Circuit& c) {
    auto issues = validate(c);
    if (issues.empty()) return;
    std::ostringstream msg;
    msg << "invalid circuit:";
    for (const auto& issue : issues) msg << " [" << issue.message << "]";
    throw structural_error(msg.str());
}

} // namespace

std::vector<StateVector> evolve_forward(const Circuit& c) {
    require_valid(c);
    std::vector<StateVector> out;
    out.reserve(c.steps.size() + 1);
    out.push_back(c.preselect);
    for (const auto& step : c.steps) {
        StateVector next = apply(compile_step(step, c.rails), out.back());
        for (const Element& e : step) {
            if (e.kind == ElementKind::Absorber) next = project_out_rail(next, e.rail_a);
        }
        out.push_back(std::move(next));
    }
    return out;
}

std::vector<StateVector> evolve_backward(const Circuit& c) {
    require_valid(c);
    std::vector<StateVector> out(c.steps.size() + 1, StateVector());
    out[c.steps.size()] = c.postselect;
    for (std::size_t i = c.steps.size(); i-- > 0;) {
        StateVector prev = out[i + 1];
        for (const Element& e : c.steps[i]) {
            if (e.kind == ElementKind::Absorber) prev = project_out_rail(prev, e.rail_a);
        }
        out[i] = apply(compile_step(c.steps[i], c.rails).dagger(), prev);
    }
    return out;
}

EvolutionTrace evolve(const Circuit& c) {
    return evolve(std::make_shared<const Circuit>(c));
}

EvolutionTrace evolve(std::shared_ptr<const Circuit> c) {
    EvolutionTrace trace;
    trace.forward = evolve_forward(*c);
    trace.backward = evolve_backward(*c);
    trace.circuit = std::move(c);
    return trace;
}

StateVector advance_one_step(const Circuit& c, std::size_t index, StateVector state) {
    if (index >= c.steps.size()) throw structural_error("step index out of range");
    state = apply(compile_step(c.steps[index], c.rails), state);
    for (const Element& e : c.steps[index]) {
        if (e.kind == ElementKind::Absorber) state = project_out_rail(state, e.rail_a);
    }
    return state;
}

AbsorberBranches branch_on_absorber(const Circuit& c, std::size_t slice, std::string_view rail) {
    if (slice >= c.steps.size()) {
        throw structural_error("no step reads slice " + std::to_string(slice));
    }
    bool found = false;
    for (const Element& e : c.steps[slice]) {
        if (e.kind == ElementKind::Absorber && e.rail_a == rail) found = true;
    }
    if (!found) {
        throw structural_error("no absorber on rail '" + std::string(rail) + "' at slice " +
                               std::to_string(slice));
    }

    auto circuit = std::make_shared<const Circuit>(c);
    EvolutionTrace main = evolve(circuit);
    const StateVector& at_slice = main.forward[slice];
    double total = at_slice.norm_squared();
    if (total < kTol) {
        throw structural_error("no amplitude reaches the absorber at slice " +
                               std::to_string(slice));
    }

    std::size_t rail_index = c.rails->index_of(rail);
    double p_absorbed = std::norm(at_slice[rail_index]) / total;
    double p_survived = 0.0;
    for (std::size_t i = 0; i < at_slice.dim(); ++i) {
        if (i != rail_index) p_survived += std::norm(at_slice[i]);
    }
    p_survived /= total;

    AbsorberBranches out;
    out.absorbed.probability = p_absorbed;
    out.survived.probability = p_survived;

    std::size_t S = c.steps.size();

    // Survived branch: renormalize the surviving amplitude at the branching
    // slice; later slices of the main trace already carry the projection.
    {
        EvolutionTrace t;
        t.circuit = circuit;
        t.forward.assign(main.forward.begin(), main.forward.begin() + slice + 1);
        double surviving_norm = project_out_rail(at_slice, std::string(rail)).norm();
        if (surviving_norm > 1e-300) {
            double scale = at_slice.norm() / surviving_norm;
            for (std::size_t j = slice + 1; j <= S; ++j) {
                t.forward.push_back(main.forward[j].scaled(scale));
            }
        } else {
            for (std::size_t j = slice + 1; j <= S; ++j) t.forward.push_back(main.forward[j]);
        }
        t.backward = main.backward;
        out.survived.trace = std::move(t);
    }

    // Absorbed branch: the click itself is the post-selection. Forward
    // collapses onto the absorber rail and stays there; backward carries the
    // click projector to earlier slices.
    {
        EvolutionTrace t;
        t.circuit = circuit;
        t.forward.assign(main.forward.begin(), main.forward.begin() + slice + 1);
        StateVector collapsed = StateVector::unit(c.rails, rail);
        if (std::abs(at_slice[rail_index]) > 1e-300) {
            collapsed = collapsed.scaled(at_slice[rail_index] / std::abs(at_slice[rail_index]));
        }
        for (std::size_t j = slice + 1; j <= S; ++j) t.forward.push_back(collapsed);

        t.backward.assign(S + 1, StateVector::unit(c.rails, rail));
        StateVector back = StateVector::unit(c.rails, rail);
        for (std::size_t i = slice; i-- > 0;) {
            StateVector prev = back;
            for (const Element& e : c.steps[i]) {
                if (e.kind == ElementKind::Absorber) prev = project_out_rail(prev, e.rail_a);
            }
            back = apply(compile_step(c.steps[i], c.rails).dagger(), prev);
            t.backward[i] = back;
        }
        for (std::size_t j = slice; j <= S; ++j) t.backward[j] = StateVector::unit(c.rails, rail);
        out.absorbed.trace = std::move(t);
    }

    return out;
}

JointTrace evolve_joint(const Circuit& c) {
    require_valid(c);
    if (!c.probe.declared()) {
        throw structural_error("joint evolution requires a declared probe");
    }
    BasisPtr pbasis = probe_basis(c.probe);

    JointTrace trace;
    trace.circuit = std::make_shared<const Circuit>(c);
    trace.slices.push_back(JointState::tensor(c.preselect, initial_probe_state(c.probe)));

    Operator probe_identity = Operator::identity(pbasis);
    for (const auto& step : c.steps) {
        JointState next = trace.slices.back().apply_system(compile_step(step, c.rails));
        for (const Element& e : step) {
            if (e.kind == ElementKind::Router) {
                // Flag flip on branch k: permutation swapping |kT> and |kR>.
                Operator flip = Operator::identity(pbasis);
                std::size_t t_index = 2 * static_cast<std::size_t>(e.probe_branch - 1);
                std::size_t r_index = t_index + 1;
                flip.set(t_index, t_index, 0.0);
                flip.set(r_index, r_index, 0.0);
                flip.set(t_index, r_index, 1.0);
                flip.set(r_index, t_index, 1.0);

                Operator p = projector_onto(e.rail_a, c.rails);
                Operator controlled =
                    kron(p, flip) + kron(Operator::identity(c.rails) - p, probe_identity);
                controlled.mark_unitary();
                next = next.apply_joint(controlled);
            } else if (e.kind == ElementKind::Absorber) {
                std::size_t i = c.rails->index_of(e.rail_a);
                Operator survive = Operator::identity(c.rails);
                survive.set(i, i, 0.0);
                next = next.apply_system(survive);
            }
        }
        trace.slices.push_back(std::move(next));
    }
    return trace;
}

} // namespace tsvf
