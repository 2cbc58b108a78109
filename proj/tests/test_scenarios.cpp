#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace tsvf;
using testutil::close;

namespace {

const double kRt13 = std::sqrt(1.0 / 3.0);
const double kRt2 = std::sqrt(0.5);

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("every built-in scenario passes its own expectation table") {
    for (const auto& builtin : builtin_scenarios()) {
        Scenario s = builtin.construct();
        CHECK(validate(s.circuit).empty());
        auto lines = self_check(s);
        CHECK(!lines.empty());
        for (const auto& line : lines) {
            INFO(builtin.name << ": " << line.description << " " << line.detail);
            CHECK(line.passed);
        }
    }
}

TEST_CASE("shipped netlist files equal the programmatic constructors") {
    for (const auto& builtin : builtin_scenarios()) {
        std::string path = std::string(TSVF_SCENARIO_DIR) + "/" + builtin.name + ".tsv";
        ParseResult parsed = parse(read_file(path));
        REQUIRE_MESSAGE(parsed.ok(), path);
        CHECK(scenario_equal(*parsed.scenario, builtin.construct()));
    }
}

TEST_CASE("single splitter: rates and arm values") {
    Scenario s = single_bs_split();
    EvolutionTrace trace = evolve(s.circuit);
    CHECK(postselection_probability(trace) == doctest::Approx(0.5).epsilon(1e-12));

    auto table = projector_weak_values(two_state_at(trace, 1));
    Amplitude sum{};
    for (const auto& [rail, wv] : table) sum += wv.value;
    CHECK(close(sum, Amplitude(1, 0), 1e-12));
}

TEST_CASE("a balanced interferometer closed on itself splits presence evenly") {
    Circuit c;
    c.rails = make_basis({"A", "B"});
    c.steps.push_back({make_mixer("A", "B", kRt2)});
    c.steps.push_back({make_mixer("B", "A", kRt2)});
    c.preselect = StateVector::unit(c.rails, "B");
    c.postselect = StateVector::unit(c.rails, "B");
    EvolutionTrace trace = evolve(c);
    CHECK(postselection_probability(trace) == doctest::Approx(1.0).epsilon(1e-12));

    auto table = projector_weak_values(two_state_at(trace, 1));
    CHECK(close(table[0].second.value, Amplitude(0.5, 0), 1e-12));
    CHECK(close(table[1].second.value, Amplitude(0.5, 0), 1e-12));
}

TEST_CASE("nested interferometer: interior state and rates") {
    Scenario s = nested_mzi();
    EvolutionTrace trace = evolve(s.circuit);
    const StateVector& mid = trace.forward[3];
    CHECK(close(mid.at("A"), kRt13, 1e-14));
    CHECK(close(mid.at("B"), kRt13, 1e-14));
    CHECK(close(mid.at("C"), kRt13, 1e-14));
    CHECK(postselection_probability(trace) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));

    const SliceLabel* b = s.find_label("B");
    REQUIRE(b != nullptr);
    CHECK(*b->rail == "B");
    CHECK(b->slice == 3);
}

TEST_CASE("three-box timeline at the four marked times") {
    Scenario s = three_box_cycle();
    EvolutionTrace trace = evolve(s.circuit);

    const struct {
        std::size_t slice;
        double a, b, c;
    } table[] = {
        {0, 1.0, -1.0, 1.0},
        {1, 0.0, 0.0, 1.0},
        {2, -1.0, 1.0, 1.0},
        {3, 1.0, -1.0, 1.0},
    };
    for (const auto& row : table) {
        auto wvs = projector_weak_values(two_state_at(trace, row.slice));
        CHECK(close(wvs[0].second.value, Amplitude(row.a, 0), 1e-12));
        CHECK(close(wvs[1].second.value, Amplitude(row.b, 0), 1e-12));
        CHECK(close(wvs[2].second.value, Amplitude(row.c, 0), 1e-12));
    }

    const SliceLabel* t2 = s.find_label("t2");
    REQUIRE(t2 != nullptr);
    CHECK(!t2->rail.has_value());
    CHECK(t2->slice == 1);
}

TEST_CASE("shutter probe: conditional probe state keeps the branch weights") {
    Scenario s = shutter_probe();
    JointTrace joint = evolve_joint(s.circuit);
    StateVector cond = joint.slices.back().conditional_probe(s.circuit.postselect);

    // Branch order (T, R) per branch: 1T 1R 2T 2R 3T 3R 4T 4R.
    Amplitude third(1.0 / 3.0, 0.0);
    StateVector target(cond.basis(), {0.5 * third, 0.0, 0.0, 0.5 * third, 0.0, 0.5 * third,
                                      0.5 * third, 0.0});
    double fidelity =
        std::norm(inner(target, cond)) / (target.norm_squared() * cond.norm_squared());
    CHECK(fidelity >= 1.0 - 1e-9);

    // R-amplitude over (overlap * alpha) recovers the path presence pattern.
    EvolutionTrace trace = evolve(s.circuit);
    Amplitude overlap = inner(trace.backward[4], trace.forward[4]);
    const double expected[] = {0.0, 1.0, 1.0, 0.0};
    for (int k = 0; k < 4; ++k) {
        Amplitude r_amp = cond[2 * static_cast<std::size_t>(k) + 1];
        Amplitude ratio = r_amp / (overlap * s.circuit.probe.amps[static_cast<std::size_t>(k)]);
        CHECK(close(ratio, Amplitude(expected[k], 0.0), 1e-9));
    }

    // Projecting on the expected flag pattern with the initial branch
    // weights succeeds every time.
    StateVector bright(cond.basis(), {0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.5, 0.0});
    CHECK(std::norm(inner(bright, cond.normalized())) == doctest::Approx(1.0).epsilon(1e-9));

    // The shutter-side post-selection rate is unchanged by the probe.
    double joint_rate = 0.0;
    for (std::size_t p = 0; p < cond.dim(); ++p) joint_rate += std::norm(cond[p]);
    CHECK(joint_rate == doctest::Approx(1.0 / 9.0).epsilon(1e-9));
}

TEST_CASE("shutter probe accepts arbitrary normalized branch amplitudes") {
    std::vector<Amplitude> amps = {0.7, 0.1, 0.5, 0.5};
    double n2 = 0.0;
    for (auto& a : amps) n2 += std::norm(a);
    for (auto& a : amps) a /= std::sqrt(n2);

    Scenario s = shutter_probe(amps);
    for (const auto& line : self_check(s)) {
        INFO(line.description << " " << line.detail);
        CHECK(line.passed);
    }

    JointTrace joint = evolve_joint(s.circuit);
    StateVector cond = joint.slices.back().conditional_probe(s.circuit.postselect);
    // Reflected branches keep their own weights: alpha_k / 3 on the R flag.
    CHECK(close(cond[3], amps[1] / 3.0, 1e-12));
    CHECK(close(cond[5], amps[2] / 3.0, 1e-12));
    CHECK(close(cond[0], amps[0] / 3.0, 1e-12));
    CHECK(close(cond[6], amps[3] / 3.0, 1e-12));
}

TEST_CASE("interaction-free measurement: click, dark and bright rates") {
    Scenario s = ifm();
    AbsorberBranches branches = branch_on_absorber(s.circuit, 1, "A");
    CHECK(branches.absorbed.probability == doctest::Approx(0.5).epsilon(1e-12));

    EvolutionTrace trace = evolve(s.circuit);
    double p_dark = postselection_probability(trace);
    CHECK(p_dark == doctest::Approx(0.25).epsilon(1e-12));

    double p_bright = std::norm(inner(StateVector::unit(s.circuit.rails, "B"),
                                      trace.forward.back()));
    CHECK(p_bright == doctest::Approx(0.25).epsilon(1e-12));

    // Dark-port conditioning defines a finite presence value on the blocked arm.
    TwoState ts = two_state_at(trace, 1);
    Amplitude blocked = weak_value(ts, projector_onto("A", s.circuit.rails)).value;
    CHECK(close(blocked, Amplitude(0.0, 0.0), 1e-12));
}

TEST_CASE("removing the object restores the interference") {
    Scenario s = ifm();
    Circuit open = s.circuit;
    for (auto& step : open.steps) {
        step.erase(std::remove_if(step.begin(), step.end(),
                                  [](const Element& e) { return e.kind == ElementKind::Absorber; }),
                   step.end());
    }
    EvolutionTrace trace = evolve(open);
    CHECK(postselection_probability(trace) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(two_state_at(trace, 1), null_postselection_error);
}

TEST_CASE("blocking the dark exit erases the interior presence pattern") {
    Scenario s = nested_mzi();
    Circuit blocked = s.circuit;
    blocked.steps.insert(blocked.steps.begin() + 5, {make_absorber("F")});

    // No forward amplitude reaches the blocked segment, so nothing is
    // absorbed and the post-selection rate is what the left path alone
    // provides.
    AbsorberBranches branches = branch_on_absorber(blocked, 5, "F");
    CHECK(branches.absorbed.probability == doctest::Approx(0.0).epsilon(1e-12));
    EvolutionTrace trace = evolve(blocked);
    CHECK(postselection_probability(trace) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));

    // But the conditional interior pattern collapses: the far-path value
    // survives and both inner-arm values vanish, unlike the open circuit.
    auto wvs = projector_weak_values(two_state_at(trace, 3));
    CHECK(close(wvs[0].second.value, Amplitude(0.0, 0.0), 1e-12)); // A, was +1
    CHECK(close(wvs[1].second.value, Amplitude(0.0, 0.0), 1e-12)); // B, was -1
    CHECK(close(wvs[2].second.value, Amplitude(1.0, 0.0), 1e-12)); // C, was +1
}

TEST_CASE("label resolution") {
    Scenario s = nested_mzi();
    auto by_symbol = resolve_at(s, "B");
    REQUIRE(by_symbol.has_value());
    CHECK(*by_symbol->rail == "B");
    CHECK(by_symbol->slice == 3);

    auto by_slice = resolve_at(s, "4");
    REQUIRE(by_slice.has_value());
    CHECK(!by_slice->rail.has_value());
    CHECK(by_slice->slice == 4);

    auto raw = resolve_at(s, "F@5");
    REQUIRE(raw.has_value());
    CHECK(*raw->rail == "F");
    CHECK(raw->slice == 5);

    CHECK(!resolve_at(s, "nosuch").has_value());
}

TEST_CASE("built-in registry lists the five canonical scenarios") {
    std::vector<std::string> names;
    for (const auto& builtin : builtin_scenarios()) names.push_back(builtin.name);
    for (const char* expected : {"single_bs", "nested_mzi", "three_box", "shutter_probe", "ifm"}) {
        CHECK(std::find(names.begin(), names.end(), expected) != names.end());
    }
}
