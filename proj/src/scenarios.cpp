#include "tsvf/scenarios.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace tsvf {

const SliceLabel* Scenario::find_label(std::string_view symbol) const {
    for (const auto& l : labels) {
        if (l.symbol == symbol) return &l;
    }
    return nullptr;
}

std::optional<ResolvedAt> resolve_at(const Scenario& s, std::string_view token) {
    if (token.empty()) return std::nullopt;
    bool digits = std::all_of(token.begin(), token.end(),
                              [](unsigned char ch) { return std::isdigit(ch) != 0; });
    if (digits) {
        return ResolvedAt{std::nullopt, static_cast<std::size_t>(std::stoul(std::string(token)))};
    }
    if (auto at = token.find('@'); at != std::string_view::npos) {
        std::string_view rail = token.substr(0, at);
        std::string_view slice = token.substr(at + 1);
        if (slice.empty() ||
            !std::all_of(slice.begin(), slice.end(),
                         [](unsigned char ch) { return std::isdigit(ch) != 0; })) {
            return std::nullopt;
        }
        ResolvedAt r;
        if (!rail.empty()) r.rail = std::string(rail);
        r.slice = static_cast<std::size_t>(std::stoul(std::string(slice)));
        return r;
    }
    if (const SliceLabel* l = s.find_label(token)) {
        return ResolvedAt{l->rail, l->slice};
    }
    return std::nullopt;
}

namespace {

std::string format_amplitude(Amplitude v) {
    std::ostringstream os;
    os << v.real();
    if (v.imag() != 0.0) os << (v.imag() < 0 ? "" : "+") << v.imag() << "i";
    return os.str();
}

std::string describe(const Expectation& e) {
    std::ostringstream os;
    switch (e.kind) {
        case ExpectKind::WeakValue:
            os << "weak " << e.rail << "@" << e.slice << " = " << format_amplitude(e.value);
            break;
        case ExpectKind::Overlap:
            os << "overlap @" << e.slice << " = " << format_amplitude(e.value);
            break;
        case ExpectKind::PostselectProb:
            os << "prob = " << e.value.real();
            break;
        case ExpectKind::Abl:
            os << "abl " << e.rail << "@" << e.slice << " = " << e.value.real();
            break;
        case ExpectKind::ProbeFidelity:
            os << "probe_fidelity = " << e.value.real();
            break;
        case ExpectKind::ProbeMatch:
            os << "probe_match = " << e.value.real();
            break;
    }
    if (!e.note.empty()) os << " (" << e.note << ")";
    return os.str();
}

struct RouterInfo {
    int branch = 0;
    std::string rail;
    std::size_t observed_slice = 0;
};

std::vector<RouterInfo> routers_of(const Circuit& c) {
    std::vector<RouterInfo> out;
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
        for (const Element& e : c.steps[i]) {
            if (e.kind == ElementKind::Router) {
                out.push_back({e.probe_branch, e.rail_a, i});
            }
        }
    }
    return out;
}

/// Conditional probe amplitudes predicted from the system two-states alone:
/// a branch routed at (rail, slice) ends with R-amplitude α_k·⟨φ|Π_rail|ψ⟩
/// and T-amplitude α_k·(⟨φ|ψ⟩ - ⟨φ|Π_rail|ψ⟩); unrouted branches keep flag
/// T with the full overlap.
StateVector factorized_probe_prediction(const Scenario& s, const EvolutionTrace& trace) {
    const Circuit& c = s.circuit;
    BasisPtr pbasis = probe_basis(c.probe);
    std::vector<Amplitude> pred(pbasis->size());
    Amplitude final_overlap = inner(c.postselect, trace.forward.back());

    std::vector<std::optional<RouterInfo>> by_branch(static_cast<std::size_t>(c.probe.branches));
    for (const RouterInfo& r : routers_of(c)) {
        by_branch[static_cast<std::size_t>(r.branch - 1)] = r;
    }
    for (int k = 0; k < c.probe.branches; ++k) {
        Amplitude alpha = c.probe.amps[static_cast<std::size_t>(k)];
        std::size_t t_index = 2 * static_cast<std::size_t>(k);
        if (by_branch[static_cast<std::size_t>(k)]) {
            const RouterInfo& r = *by_branch[static_cast<std::size_t>(k)];
            const StateVector& phi = trace.backward[r.observed_slice];
            const StateVector& psi = trace.forward[r.observed_slice];
            std::size_t rail = c.rails->index_of(r.rail);
            Amplitude overlap = inner(phi, psi);
            Amplitude reflected = std::conj(phi[rail]) * psi[rail];
            pred[t_index] = alpha * (overlap - reflected);
            pred[t_index + 1] = alpha * reflected;
        } else {
            pred[t_index] = alpha * final_overlap;
        }
    }
    return StateVector(pbasis, std::move(pred));
}

} // namespace

std::vector<CheckLine> self_check(const Scenario& s, double tol) {
    std::vector<CheckLine> out;
    EvolutionTrace trace = evolve(s.circuit);
    std::optional<StateVector> conditional_probe;

    auto conditional = [&]() -> const StateVector& {
        if (!conditional_probe) {
            JointTrace joint = evolve_joint(s.circuit);
            conditional_probe = joint.slices.back().conditional_probe(s.circuit.postselect);
        }
        return *conditional_probe;
    };

    for (const Expectation& e : s.expected) {
        CheckLine line;
        line.description = describe(e);
        try {
            switch (e.kind) {
                case ExpectKind::WeakValue: {
                    TwoState ts = two_state_at(trace, e.slice);
                    Amplitude got =
                        weak_value(ts, projector_onto(e.rail, s.circuit.rails)).value;
                    line.passed = std::abs(got - e.value) <= tol;
                    if (!line.passed) {
                        line.detail = "got " + format_amplitude(got);
                    }
                    break;
                }
                case ExpectKind::Overlap: {
                    if (e.slice >= trace.forward.size()) throw structural_error("slice out of range");
                    Amplitude got = inner(trace.backward[e.slice], trace.forward[e.slice]);
                    line.passed = std::abs(got - e.value) <= tol;
                    if (!line.passed) line.detail = "got " + format_amplitude(got);
                    break;
                }
                case ExpectKind::PostselectProb: {
                    double got = postselection_probability(trace);
                    line.passed = std::abs(got - e.value.real()) <= tol;
                    if (!line.passed) line.detail = "got " + std::to_string(got);
                    break;
                }
                case ExpectKind::Abl: {
                    double got =
                        abl_probability(trace, e.slice, projector_onto(e.rail, s.circuit.rails));
                    line.passed = std::abs(got - e.value.real()) <= tol;
                    if (!line.passed) line.detail = "got " + std::to_string(got);
                    break;
                }
                case ExpectKind::ProbeFidelity: {
                    StateVector pred = factorized_probe_prediction(s, trace);
                    const StateVector& cond = conditional();
                    double fidelity = std::norm(inner(pred, cond)) /
                                      (pred.norm_squared() * cond.norm_squared());
                    line.passed = std::abs(fidelity - e.value.real()) <= tol;
                    if (!line.passed) line.detail = "got " + std::to_string(fidelity);
                    break;
                }
                case ExpectKind::ProbeMatch: {
                    const Circuit& c = s.circuit;
                    const StateVector& cond = conditional();
                    BasisPtr pbasis = cond.basis();
                    std::vector<Amplitude> target(pbasis->size());
                    std::vector<std::optional<RouterInfo>> by_branch(
                        static_cast<std::size_t>(c.probe.branches));
                    for (const RouterInfo& r : routers_of(c)) {
                        by_branch[static_cast<std::size_t>(r.branch - 1)] = r;
                    }
                    for (int k = 0; k < c.probe.branches; ++k) {
                        std::size_t t_index = 2 * static_cast<std::size_t>(k);
                        bool reflected = false;
                        if (by_branch[static_cast<std::size_t>(k)]) {
                            const RouterInfo& r = *by_branch[static_cast<std::size_t>(k)];
                            TwoState ts = two_state_at(trace, r.observed_slice);
                            Amplitude wv =
                                weak_value(ts, projector_onto(r.rail, c.rails)).value;
                            if (std::abs(wv - 1.0) < 1e-6) {
                                reflected = true;
                            } else if (std::abs(wv) >= 1e-6) {
                                throw structural_error(
                                    "branch weak value is neither 0 nor 1; no flag pattern");
                            }
                        }
                        target[reflected ? t_index + 1 : t_index] =
                            c.probe.amps[static_cast<std::size_t>(k)];
                    }
                    StateVector target_state(pbasis, std::move(target));
                    double prob = std::norm(inner(target_state.normalized(), cond.normalized()));
                    line.passed = std::abs(prob - e.value.real()) <= tol;
                    if (!line.passed) line.detail = "got " + std::to_string(prob);
                    break;
                }
            }
        } catch (const std::exception& ex) {
            line.passed = false;
            line.detail = ex.what();
        }
        out.push_back(std::move(line));
    }
    return out;
}

namespace {

double rt(double p, double q) { return std::sqrt(p / q); }

StateVector amplitudes_for(const BasisPtr& rails,
                           std::initializer_list<std::pair<const char*, Amplitude>> entries) {
    std::vector<Amplitude> amps(rails->size());
    for (const auto& [rail, value] : entries) {
        amps[rails->index_of(rail)] = value;
    }
    return StateVector(rails, std::move(amps));
}

Expectation expect_weak(std::string rail, std::size_t slice, Amplitude value, std::string note) {
    return {ExpectKind::WeakValue, std::move(rail), slice, value, std::move(note)};
}

Expectation expect_overlap(std::size_t slice, Amplitude value, std::string note) {
    return {ExpectKind::Overlap, "", slice, value, std::move(note)};
}

Expectation expect_prob(double value, std::string note) {
    return {ExpectKind::PostselectProb, "", 0, value, std::move(note)};
}

Expectation expect_abl(std::string rail, std::size_t slice, double value, std::string note) {
    return {ExpectKind::Abl, std::move(rail), slice, value, std::move(note)};
}

Scenario finalize(Scenario s) {
    auto issues = validate(s.circuit);
    if (!issues.empty()) {
        throw structural_error("scenario '" + s.name + "': " + issues.front().message);
    }
    for (const CheckLine& line : self_check(s)) {
        if (!line.passed) {
            throw structural_error("scenario '" + s.name + "' failed self-check: " +
                                   line.description + " — " + line.detail);
        }
    }
    canonicalize(s);
    return s;
}

} // namespace

Scenario single_bs_split() {
    Scenario s;
    s.name = "single_bs";
    Circuit& c = s.circuit;
    c.rails = make_basis({"A", "B"});
    c.steps = {{make_mixer("A", "B", rt(1, 2))}};
    c.preselect = StateVector::unit(c.rails, "B");
    c.postselect = StateVector::unit(c.rails, "A");
    c.detectors = {{"D1", "A"}, {"D2", "B"}};
    s.labels = {{"A", "A", 1}, {"B", "B", 1}};
    s.expected = {
        expect_prob(0.5, "either detector fires half the time"),
        expect_overlap(1, rt(1, 2), "detector-1 conditioning"),
        expect_weak("A", 1, 1.0, "the detected path"),
        expect_weak("B", 1, 0.0, "the undetected path"),
    };
    return finalize(std::move(s));
}

Scenario nested_mzi() {
    Scenario s;
    s.name = "nested_mzi";
    Circuit& c = s.circuit;
    c.rails = make_basis({"A", "B", "C", "E", "F", "D1"});
    c.steps = {
        {make_mixer("C", "E", rt(2, 3))},
        {make_mixer("B", "E", rt(1, 2))},
        {make_swap("E", "A")},
        {make_mixer("B", "A", rt(1, 2))},
        {make_swap("B", "D1"), make_swap("A", "F")},
        {make_mixer("C", "F", rt(1, 3))},
    };
    c.preselect = StateVector::unit(c.rails, "E");
    c.postselect = StateVector::unit(c.rails, "C");
    c.detectors = {{"D1", "D1"}, {"D2", "F"}, {"D3", "C"}};
    s.labels = {
        {"A", "A", 3}, {"B", "B", 3}, {"C", "C", 3}, {"E", "E", 1}, {"F", "F", 5},
    };
    s.expected = {
        expect_overlap(3, 1.0 / 3.0, "two-state overlap inside the interferometer"),
        expect_weak("A", 3, 1.0, "inner right path: present"),
        expect_weak("B", 3, -1.0, "inner left path: negative presence"),
        expect_weak("C", 3, 1.0, "outer left path: present"),
        expect_weak("E", 1, 0.0, "entry segment: the pair cancels"),
        expect_weak("F", 5, 0.0, "exit segment: the pair cancels"),
        expect_prob(1.0 / 9.0, "rate of D3 clicks"),
        expect_abl("A", 3, 1.0, "projective outcome certain in A"),
        expect_abl("C", 3, 1.0, "projective outcome certain in C"),
        expect_abl("B", 3, 0.2, "projective outcome rate for B"),
    };
    return finalize(std::move(s));
}

Scenario three_box_cycle() {
    Scenario s;
    s.name = "three_box";
    Circuit& c = s.circuit;
    c.rails = make_basis({"A", "B", "C"});
    // R rotates |A> -> (|A>+|B>)/sqrt(2); R^-2 is the quarter turn back.
    c.steps = {
        {make_mixer("B", "A", rt(1, 2))},
        {make_mixer("B", "A", rt(1, 2))},
        {make_mixer("A", "B", 0.0)},
    };
    c.preselect = amplitudes_for(c.rails, {{"A", rt(1, 3)}, {"B", rt(1, 3)}, {"C", rt(1, 3)}});
    c.postselect = amplitudes_for(c.rails, {{"A", rt(1, 3)}, {"B", -rt(1, 3)}, {"C", rt(1, 3)}});
    s.labels = {
        {"t1", std::nullopt, 0},
        {"t2", std::nullopt, 1},
        {"t3", std::nullopt, 2},
        {"t4", std::nullopt, 3},
    };
    s.expected = {
        expect_overlap(0, 1.0 / 3.0, "boundary overlap, constant across the cycle"),
        expect_prob(1.0 / 9.0, "post-selection rate"),
        expect_weak("A", 0, 1.0, "t1: in A"),
        expect_weak("B", 0, -1.0, "t1: negative in B"),
        expect_weak("C", 0, 1.0, "t1: in C"),
        expect_weak("A", 1, 0.0, "t2: gone from A"),
        expect_weak("B", 1, 0.0, "t2: gone from B"),
        expect_weak("C", 1, 1.0, "t2: only in C"),
        expect_weak("A", 2, -1.0, "t3: negative in A"),
        expect_weak("B", 2, 1.0, "t3: back in B"),
        expect_weak("C", 2, 1.0, "t3: in C"),
        expect_weak("A", 3, 1.0, "t4: in A again"),
        expect_weak("B", 3, -1.0, "t4: negative in B again"),
        expect_weak("C", 3, 1.0, "t4: in C"),
    };
    return finalize(std::move(s));
}

Scenario shutter_probe() {
    return shutter_probe({0.5, 0.5, 0.5, 0.5});
}

Scenario shutter_probe(const std::vector<Amplitude>& branch_amps) {
    Scenario s;
    s.name = "shutter_probe";
    Circuit& c = s.circuit;
    c.rails = make_basis({"A", "B", "C", "E", "F", "D1"});
    c.steps = {
        {make_mixer("C", "E", rt(2, 3))},
        {make_router("E", 1, 1)},
        {make_mixer("B", "E", rt(1, 2))},
        {make_swap("E", "A")},
        {make_router("A", 2, 4), make_router("C", 3, 4)},
        {make_mixer("B", "A", rt(1, 2))},
        {make_swap("B", "D1"), make_swap("A", "F")},
        {make_router("F", 4, 7)},
        {make_mixer("C", "F", rt(1, 3))},
    };
    c.preselect = StateVector::unit(c.rails, "E");
    c.postselect = StateVector::unit(c.rails, "C");
    c.detectors = {{"D1", "D1"}, {"D2", "F"}, {"D3", "C"}};
    c.probe.branches = static_cast<int>(branch_amps.size());
    c.probe.amps = branch_amps;
    s.labels = {
        {"A", "A", 4}, {"B", "B", 4}, {"C", "C", 4}, {"E", "E", 1}, {"F", "F", 7},
        {"t1", std::nullopt, 1}, {"t2", std::nullopt, 4},
        {"t3", std::nullopt, 7}, {"t4", std::nullopt, 9},
    };
    s.expected = {
        expect_overlap(4, 1.0 / 3.0, "two-state overlap inside the interferometer"),
        expect_prob(1.0 / 9.0, "shutter post-selection rate"),
        expect_weak("E", 1, 0.0, "probe branch 1 location: unoccupied"),
        expect_weak("A", 4, 1.0, "probe branch 2 location: occupied"),
        expect_weak("B", 4, -1.0, "negative companion of the occupied path"),
        expect_weak("C", 4, 1.0, "probe branch 3 location: occupied"),
        expect_weak("F", 7, 0.0, "probe branch 4 location: unoccupied"),
        {ExpectKind::ProbeFidelity, "", 0, 1.0,
         "joint evolution matches the factorized conditional probe"},
        {ExpectKind::ProbeMatch, "", 0, 1.0,
         "probe recombines at its bright port with unchanged branch weights"},
    };
    return finalize(std::move(s));
}

Scenario ifm() {
    Scenario s;
    s.name = "ifm";
    Circuit& c = s.circuit;
    c.rails = make_basis({"A", "B"});
    c.steps = {
        {make_mixer("A", "B", rt(1, 2))},
        {make_absorber("A")},
        {make_mixer("B", "A", rt(1, 2))},
    };
    c.preselect = StateVector::unit(c.rails, "B");
    c.postselect = StateVector::unit(c.rails, "A"); // dark port
    c.detectors = {{"bright", "B"}, {"dark", "A"}};
    s.labels = {{"object", "A", 1}};
    s.expected = {
        expect_prob(0.25, "dark-port clicks among all trials"),
        expect_overlap(1, -0.5, "dark-port conditioning across the object arm"),
        expect_weak("A", 1, 0.0, "blocked arm, conditioned on survival"),
        expect_weak("B", 1, 1.0, "free arm carries the surviving photon"),
    };
    return finalize(std::move(s));
}

const std::vector<BuiltinScenario>& builtin_scenarios() {
    static const std::vector<BuiltinScenario> scenarios = {
        {"single_bs", "one 50/50 splitter; conditioning empties one path in each time direction",
         single_bs_split},
        {"nested_mzi", "nested Mach-Zehnder; rare-port detection gives inner arm values +1, -1, +1",
         nested_mzi},
        {"three_box", "three-box cycle; conditional presence hops between boxes under fixed boundary states",
         three_box_cycle},
        {"shutter_probe", "time-binned probe branches record which interferometer arms block them",
         [] { return shutter_probe(); }},
        {"ifm", "interaction-free measurement; an absorber that absorbed nothing still shifts the statistics",
         ifm},
    };
    return scenarios;
}

namespace {

int kind_rank(ElementKind k) {
    switch (k) {
        case ElementKind::Mixer: return 0;
        case ElementKind::Phase: return 1;
        case ElementKind::Swap: return 2;
        case ElementKind::Absorber: return 3;
        case ElementKind::Router: return 4;
    }
    return 5;
}

int expect_rank(ExpectKind k) {
    switch (k) {
        case ExpectKind::Overlap: return 0;
        case ExpectKind::WeakValue: return 1;
        case ExpectKind::PostselectProb: return 2;
        case ExpectKind::Abl: return 3;
        case ExpectKind::ProbeFidelity: return 4;
        case ExpectKind::ProbeMatch: return 5;
    }
    return 6;
}

} // namespace

void canonicalize(Scenario& s) {
    // Trailing element-free steps act as identities and have no netlist
    // representation; every slice they add holds the final state, so slice
    // references clamp to the trimmed end without changing any quantity.
    while (!s.circuit.steps.empty() && s.circuit.steps.back().empty()) {
        s.circuit.steps.pop_back();
    }
    std::size_t last = s.circuit.steps.size();
    for (auto& label : s.labels) label.slice = std::min(label.slice, last);
    for (auto& e : s.expected) e.slice = std::min(e.slice, last);

    for (auto& step : s.circuit.steps) {
        std::sort(step.begin(), step.end(), [](const Element& a, const Element& b) {
            return std::tuple(kind_rank(a.kind), a.rail_a, a.rail_b, a.probe_branch) <
                   std::tuple(kind_rank(b.kind), b.rail_a, b.rail_b, b.probe_branch);
        });
    }
    std::sort(s.labels.begin(), s.labels.end(),
              [](const SliceLabel& a, const SliceLabel& b) { return a.symbol < b.symbol; });
    std::sort(s.expected.begin(), s.expected.end(), [](const Expectation& a, const Expectation& b) {
        return std::tuple(expect_rank(a.kind), a.slice, a.rail) <
               std::tuple(expect_rank(b.kind), b.slice, b.rail);
    });
}

bool scenario_equal(const Scenario& a, const Scenario& b) {
    Scenario x = a;
    Scenario y = b;
    canonicalize(x);
    canonicalize(y);
    if (x.name != y.name) return false;
    if (!same_basis(x.circuit.rails, y.circuit.rails)) return false;
    if (x.circuit.steps != y.circuit.steps) return false;
    if (x.circuit.detectors != y.circuit.detectors) return false;
    if (x.circuit.preselect.amplitudes() != y.circuit.preselect.amplitudes()) return false;
    if (x.circuit.postselect.amplitudes() != y.circuit.postselect.amplitudes()) return false;
    if (!(x.circuit.probe == y.circuit.probe)) return false;
    if (x.labels != y.labels) return false;
    if (x.expected != y.expected) return false;
    return true;
}

} // namespace tsvf
