#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

using nlohmann::json;

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string out;
};

CommandResult run_command(const std::string& args) {
    std::string cmd = std::string(TSVF_CLI_PATH) + " " + args;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CommandResult result;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) {
        result.out.append(buf, n);
    }
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string scenario_path(const std::string& name) {
    return std::string(TSVF_SCENARIO_DIR) + "/" + name + ".tsv";
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = "/tmp/" + name;
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Small structural validator for the subset of JSON Schema the shipped
// schema uses: type, required, properties, additionalProperties, items.
bool schema_check(const json& schema, const json& value, std::string& err) {
    if (schema.contains("type")) {
        const std::string type = schema["type"];
        bool ok = (type == "object" && value.is_object()) ||
                  (type == "array" && value.is_array()) ||
                  (type == "string" && value.is_string()) ||
                  (type == "boolean" && value.is_boolean()) ||
                  (type == "integer" && value.is_number_integer()) ||
                  (type == "number" && value.is_number());
        if (!ok) {
            err = "expected " + type + ", got " + value.dump().substr(0, 40);
            return false;
        }
    }
    if (schema.contains("required")) {
        for (const auto& key : schema["required"]) {
            if (!value.contains(key.get<std::string>())) {
                err = "missing required key " + key.get<std::string>();
                return false;
            }
        }
    }
    if (schema.contains("properties") && value.is_object()) {
        const json& props = schema["properties"];
        for (const auto& [key, sub] : value.items()) {
            if (props.contains(key)) {
                if (!schema_check(props[key], sub, err)) {
                    err = key + ": " + err;
                    return false;
                }
            } else if (schema.value("additionalProperties", json(true)) == json(false)) {
                err = "unexpected key " + key;
                return false;
            }
        }
    }
    if (schema.contains("items") && value.is_array()) {
        for (const auto& item : value) {
            if (!schema_check(schema["items"], item, err)) return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("run --at B reports the anomalous arm value") {
    CommandResult r = run_command("run " + scenario_path("nested_mzi") + " --at B");
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.out);
    CHECK(report["scenario"] == "nested_mzi");
    CHECK(report["postselection_probability"].get<double>() ==
          doctest::Approx(1.0 / 9.0).epsilon(1e-9));
    bool found = false;
    for (const auto& row : report["weak_values"]) {
        if (row["rail"] == "B") {
            found = true;
            CHECK(row["slice"] == 3);
            CHECK(row["re"].get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
            CHECK(row["im"].get<double>() == 0.0);
        }
    }
    CHECK(found);
}

TEST_CASE("run --at t2 on the three-box file") {
    CommandResult r = run_command("run " + scenario_path("three_box") + " --at t2");
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.out);
    double expected[] = {0.0, 0.0, 1.0};
    int i = 0;
    for (const auto& row : report["weak_values"]) {
        CHECK(row["re"].get<double>() == doctest::Approx(expected[i]).epsilon(1e-9));
        CHECK(row["im"].get<double>() == 0.0);
        ++i;
    }
    CHECK(i == 3);
}

TEST_CASE("reports are byte-identical across runs") {
    std::string args = "run " + scenario_path("nested_mzi") +
                       " --at B --abl B --abl A --pointer B --g 0.1 --sigma 1 "
                       "--trials 5000 --seed 99";
    CommandResult a = run_command(args);
    CommandResult b = run_command(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
    REQUIRE(!a.out.empty());

    json report = json::parse(a.out);
    CHECK(report["abl"].size() == 2);
    CHECK(report["pointer"]["mean"].get<double>() < 0.0);
    CHECK(report["montecarlo"]["accepted"] == true);
}

TEST_CASE("exit codes follow the contract") {
    CHECK(run_command("run " + scenario_path("nested_mzi") + " --at B 2>/dev/null").exit_code == 0);

    std::string bad = write_temp("tsvf_bad.tsv", "rails A B\nstep 1: bs A B t=1.5\n"
                                                 "preselect A=1\npostselect B=1\n");
    CHECK(run_command("run " + bad + " 2>/dev/null").exit_code == 1);
    CHECK(run_command("check " + bad + " 2>/dev/null").exit_code == 1);

    std::string orthogonal = write_temp("tsvf_orth.tsv", "rails A B\n"
                                                         "preselect A=1\npostselect B=1\n");
    CHECK(run_command("run " + orthogonal + " --at 0 2>/dev/null").exit_code == 2);

    CHECK(run_command("run /nonexistent.tsv 2>/dev/null").exit_code == 1);
}

TEST_CASE("check prints one verdict per expectation") {
    CommandResult r = run_command("check " + scenario_path("nested_mzi"));
    REQUIRE(r.exit_code == 0);
    int ok_lines = 0;
    std::istringstream lines(r.out);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("ok", 0) == 0) ++ok_lines;
        CHECK(line.rfind("FAIL", 0) != 0);
    }
    CHECK(ok_lines >= 7);
}

TEST_CASE("list names the built-in scenarios") {
    CommandResult r = run_command("list");
    REQUIRE(r.exit_code == 0);
    for (const char* name : {"single_bs", "nested_mzi", "three_box", "shutter_probe", "ifm"}) {
        CHECK(r.out.find(name) != std::string::npos);
    }
}

TEST_CASE("sample streams: header, shape, determinism") {
    std::string out_path = "/tmp/tsvf_samples.csv";
    std::string args = "run " + scenario_path("nested_mzi") +
                       " --pointer B --g 0.1 --sigma 1 --trials 200 --seed 5 --samples-out " +
                       out_path;
    CommandResult r = run_command(args);
    REQUIRE(r.exit_code == 0);
    std::string csv = read_file(out_path);
    CHECK(csv.rfind("trial,reading,postselected\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 201);

    json report = json::parse(r.out);
    CHECK(report["montecarlo"]["samples_out"] == out_path);

    // --format csv streams the same bytes to standard output.
    CommandResult streamed = run_command("run " + scenario_path("nested_mzi") +
                                         " --pointer B --g 0.1 --sigma 1 --trials 200 --seed 5 "
                                         "--format csv");
    REQUIRE(streamed.exit_code == 0);
    CHECK(streamed.out == csv);

    CHECK(run_command("run " + scenario_path("nested_mzi") + " --format csv 2>/dev/null")
              .exit_code == 1);
}

TEST_CASE("reports validate against the shipped schema") {
    json schema = json::parse(read_file(TSVF_SCHEMA_PATH));

    for (const std::string& args :
         {std::string("run ") + scenario_path("nested_mzi") + " --at B --abl B",
          std::string("run ") + scenario_path("three_box"),
          std::string("run ") + scenario_path("nested_mzi") +
              " --pointer B --g 0.1 --sigma 1 --trials 100 --seed 1"}) {
        CommandResult r = run_command(args);
        REQUIRE(r.exit_code == 0);
        std::string err;
        bool ok = schema_check(schema, json::parse(r.out), err);
        INFO(err);
        CHECK(ok);
    }
}

TEST_CASE("export round-trips through check") {
    std::string path = "/tmp/tsvf_exported.tsv";
    CHECK(run_command("export three_box --out " + path).exit_code == 0);
    CHECK(run_command("check " + path).exit_code == 0);
    CHECK(run_command("export nosuch 2>/dev/null").exit_code == 1);
}
