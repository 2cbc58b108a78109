#include "tsvf/netlist.hpp"
#include "tsvf/pointer.hpp"
#include "tsvf/report.hpp"
#include "tsvf/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;     // parse / validation / usage failures
constexpr int kExitImpossible = 2;     // null post-selection / impossible history

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_parse_errors(const std::string& path, const std::vector<tsvf::ParseError>& errors) {
    for (const auto& e : errors) {
        std::cerr << path << ":" << e.span.line << ":" << e.span.col_begin << ": error ["
                  << tsvf::to_string(e.kind) << "]: " << e.message << "\n";
    }
}

std::optional<tsvf::Scenario> load_scenario(const std::string& path) {
    auto text = read_file(path);
    if (!text) {
        std::cerr << path << ": cannot open file\n";
        return std::nullopt;
    }
    tsvf::ParseResult parsed = tsvf::parse(*text);
    if (!parsed.ok()) {
        print_parse_errors(path, parsed.errors);
        return std::nullopt;
    }
    auto issues = tsvf::validate(parsed.scenario->circuit);
    if (!issues.empty()) {
        for (const auto& issue : issues) {
            std::cerr << path << ": validation error: " << issue.message << "\n";
        }
        return std::nullopt;
    }
    if (parsed.scenario->name.empty()) {
        // Fall back to the file stem so reports always carry a name.
        std::string stem = path;
        if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) {
            stem = stem.substr(slash + 1);
        }
        if (auto dot = stem.find_last_of('.'); dot != std::string::npos) {
            stem = stem.substr(0, dot);
        }
        parsed.scenario->name = stem;
    }
    return parsed.scenario;
}

struct RunOptions {
    std::string file;
    std::string at;
    std::vector<std::string> abl;
    std::string pointer_at;
    double g = 0.0;
    double sigma = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 1;
    std::string format = "json";
    std::string samples_out;
};

std::optional<std::pair<std::string, std::size_t>> resolve_rail_slice(
    const tsvf::Scenario& s, const std::string& token, const char* what) {
    auto resolved = tsvf::resolve_at(s, token);
    if (!resolved || !resolved->rail) {
        std::cerr << what << " '" << token << "' does not name a rail@slice position\n";
        return std::nullopt;
    }
    if (!s.circuit.rails->contains(*resolved->rail)) {
        std::cerr << what << " '" << token << "' names unknown rail '" << *resolved->rail << "'\n";
        return std::nullopt;
    }
    if (resolved->slice > s.circuit.num_slices()) {
        std::cerr << what << " '" << token << "' is beyond the final slice\n";
        return std::nullopt;
    }
    return std::make_pair(*resolved->rail, resolved->slice);
}

int cmd_run(const RunOptions& opt) {
    auto scenario = load_scenario(opt.file);
    if (!scenario) return kExitInputError;
    const tsvf::Scenario& s = *scenario;

    tsvf::EvolutionTrace trace = tsvf::evolve(s.circuit);

    tsvf::Report report;
    report.scenario = s.name;
    report.postselection_probability = tsvf::postselection_probability(trace);

    // Weak-value table: the requested slice, or every labeled slice.
    std::vector<std::size_t> slices;
    if (!opt.at.empty()) {
        auto resolved = tsvf::resolve_at(s, opt.at);
        if (!resolved) {
            std::cerr << "--at '" << opt.at << "' is neither a slice nor a known symbol\n";
            return kExitInputError;
        }
        if (resolved->slice > s.circuit.num_slices()) {
            std::cerr << "--at '" << opt.at << "' is beyond the final slice\n";
            return kExitInputError;
        }
        slices.push_back(resolved->slice);
    } else {
        std::set<std::size_t> seen;
        for (const auto& label : s.labels) seen.insert(label.slice);
        slices.assign(seen.begin(), seen.end());
    }
    for (std::size_t k : slices) {
        tsvf::TwoState ts = tsvf::two_state_at(trace, k);
        for (const auto& [rail, wv] : tsvf::projector_weak_values(ts)) {
            report.weak_values.push_back({rail, k, wv.value.real(), wv.value.imag()});
        }
    }

    for (const std::string& token : opt.abl) {
        auto target = resolve_rail_slice(s, token, "--abl");
        if (!target) return kExitInputError;
        double p = tsvf::abl_probability(trace, target->second,
                                         tsvf::projector_onto(target->first, s.circuit.rails));
        report.abl.push_back({target->first, target->second, p});
    }

    std::optional<tsvf::MonteCarloReport> mc;
    if (!opt.pointer_at.empty()) {
        auto target = resolve_rail_slice(s, opt.pointer_at, "--pointer");
        if (!target) return kExitInputError;
        tsvf::PointerConfig cfg;
        cfg.g = opt.g;
        cfg.sigma = opt.sigma;
        tsvf::TwoState ts = tsvf::two_state_at(trace, target->second);
        tsvf::Operator proj = tsvf::projector_onto(target->first, s.circuit.rails);
        tsvf::PointerOutcome outcome = tsvf::weak_pointer_state(ts, proj, cfg);
        tsvf::WeakValue wv = tsvf::weak_value(ts, proj);

        tsvf::PointerSection section;
        section.rail = target->first;
        section.slice = target->second;
        section.g = cfg.g;
        section.sigma = cfg.sigma;
        section.mean = outcome.mean;
        section.variance = outcome.variance;
        section.success_probability = outcome.success_probability;
        section.weak_re = wv.value.real();
        section.weak_im = wv.value.imag();
        report.pointer = section;

        if (opt.trials > 0) {
            mc = tsvf::sample_trials(ts, proj, cfg, opt.trials, opt.seed);
            tsvf::MonteCarloSection msec;
            msec.n = mc->n_attempted;
            msec.seed = opt.seed;
            msec.n_postselected = mc->n_postselected;
            msec.sample_mean = mc->sample_mean;
            msec.std_error = mc->std_error;
            msec.accepted = mc->n_postselected > 0 &&
                            std::abs(mc->sample_mean - outcome.mean) <= 5.0 * mc->std_error;
            if (!opt.samples_out.empty()) msec.samples_path = opt.samples_out;
            report.montecarlo = msec;
        }
    } else if (opt.trials > 0) {
        std::cerr << "--trials requires --pointer\n";
        return kExitInputError;
    }

    if (!opt.samples_out.empty()) {
        if (!mc) {
            std::cerr << "--samples-out requires --pointer and --trials\n";
            return kExitInputError;
        }
        std::ofstream out(opt.samples_out, std::ios::binary);
        if (!out) {
            std::cerr << opt.samples_out << ": cannot write samples\n";
            return kExitInputError;
        }
        out << tsvf::samples_csv(*mc);
    }

    if (opt.format == "csv") {
        if (!mc) {
            std::cerr << "--format csv emits the sample stream and requires --pointer and --trials\n";
            return kExitInputError;
        }
        std::cout << tsvf::samples_csv(*mc);
    } else {
        std::cout << tsvf::to_json(report);
    }
    return kExitOk;
}

int cmd_list() {
    for (const auto& builtin : tsvf::builtin_scenarios()) {
        std::printf("%-14s %s\n", builtin.name.c_str(), builtin.brief.c_str());
    }
    return kExitOk;
}

int cmd_check(const std::string& path) {
    auto text = read_file(path);
    if (!text) {
        std::cerr << path << ": cannot open file\n";
        return kExitInputError;
    }
    tsvf::ParseResult parsed = tsvf::parse(*text);
    if (!parsed.ok()) {
        print_parse_errors(path, parsed.errors);
        return kExitInputError;
    }
    bool ok = true;
    auto issues = tsvf::validate(parsed.scenario->circuit);
    for (const auto& issue : issues) {
        std::cout << "FAIL validate: " << issue.message << "\n";
        ok = false;
    }
    if (issues.empty()) {
        for (const auto& line : tsvf::self_check(*parsed.scenario)) {
            if (line.passed) {
                std::cout << "ok   " << line.description << "\n";
            } else {
                std::cout << "FAIL " << line.description;
                if (!line.detail.empty()) std::cout << " — " << line.detail;
                std::cout << "\n";
                ok = false;
            }
        }
    }
    return ok ? kExitOk : kExitInputError;
}

int cmd_export(const std::string& name, const std::string& out_path) {
    for (const auto& builtin : tsvf::builtin_scenarios()) {
        if (builtin.name != name) continue;
        std::string text = tsvf::serialize(builtin.construct());
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) {
                std::cerr << out_path << ": cannot write\n";
                return kExitInputError;
            }
            out << text;
        }
        return kExitOk;
    }
    std::cerr << "unknown built-in scenario '" << name << "'\n";
    return kExitInputError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-state-vector interferometry toolkit: forward/backward evolution, "
                 "weak values, projective conditional probabilities, Gaussian-pointer "
                 "weak measurements"};
    app.set_version_flag("--version", std::string(tsvf::kToolName) + " " + tsvf::kVersion);
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "Analyze a scenario file and print a report");
    run->add_option("file", run_opt.file, "scenario netlist (.tsv)")->required();
    run->add_option("--at", run_opt.at, "weak-value slice or symbol (default: all labeled slices)");
    run->add_option("--abl", run_opt.abl, "projective probability target rail@slice or symbol");
    auto* pointer_opt =
        run->add_option("--pointer", run_opt.pointer_at, "pointer measurement target rail@slice or symbol");
    auto* g_opt = run->add_option("--g", run_opt.g, "pointer coupling strength");
    auto* sigma_opt = run->add_option("--sigma", run_opt.sigma, "pointer spread (> 0)");
    pointer_opt->needs(g_opt)->needs(sigma_opt);
    g_opt->needs(pointer_opt);
    sigma_opt->needs(pointer_opt);
    auto* trials_opt = run->add_option("--trials", run_opt.trials, "Monte Carlo trial count");
    trials_opt->needs(pointer_opt);
    run->add_option("--seed", run_opt.seed, "Monte Carlo seed (default 1)");
    run->add_option("--format", run_opt.format, "json (report) or csv (sample stream)")
        ->check(CLI::IsMember({"json", "csv"}));
    run->add_option("--samples-out", run_opt.samples_out, "write the sample stream CSV here");

    CLI::App* list = app.add_subcommand("list", "List built-in scenarios");

    std::string check_file;
    CLI::App* check = app.add_subcommand("check", "Parse, validate and self-check a scenario file");
    check->add_option("file", check_file, "scenario netlist (.tsv)")->required();

    std::string export_name;
    std::string export_out;
    CLI::App* exp = app.add_subcommand("export", "Write a built-in scenario in canonical netlist form");
    exp->add_option("name", export_name, "built-in scenario name")->required();
    exp->add_option("--out", export_out, "output path (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (list->parsed()) return cmd_list();
        if (check->parsed()) return cmd_check(check_file);
        if (exp->parsed()) return cmd_export(export_name, export_out);
    } catch (const tsvf::null_postselection_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitImpossible;
    } catch (const tsvf::impossible_history_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitImpossible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
