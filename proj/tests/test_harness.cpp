#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <string>

#include "pdl/harness.hpp"

using namespace pdl;
using namespace pdl::harness;
using nlohmann::json;

namespace {

const char* kScenarios[] = {
    "football-slice",  "surgery-breach", "churn-consensus", "collusion-blacklist",
    "oracle-attack",   "npn-plmn-handover", "relay-interop",
};

std::string scenario_path(const std::string& name) {
    return std::string(PDL_SCENARIO_DIR) + "/" + name + ".json";
}

std::string golden_path(const std::string& name, const std::string& suffix) {
    return std::string(PDL_GOLDEN_DIR) + "/" + name + suffix;
}

// writes content to a throwaway file and returns its path
std::string temp_file(const std::string& tag, const std::string& content) {
    auto path = (std::filesystem::temp_directory_path() / ("pdl-test-" + tag)).string();
    REQUIRE(write_file(path, content).ok());
    return path;
}

}  // namespace

TEST_CASE("every bundled scenario loads and validates") {
    for (const char* name : kScenarios) {
        auto sc = Scenario::load(scenario_path(name));
        REQUIRE_MESSAGE(sc.ok(), name, ": ", sc.ok() ? "" : sc.error().message);
        CHECK(sc.value().name == name);
        CHECK(sc.value().validate().ok());
    }
}

TEST_CASE("parse failures point at the offending line") {
    std::string path = temp_file("broken.json", "{\n  \"schema\": 1,\n  \"name\": oops\n}\n");
    auto sc = Scenario::load(path);
    REQUIRE_FALSE(sc.ok());
    CHECK(sc.code() == Err::ScenarioParseError);
    CHECK(sc.error().message.find("line 3") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("semantic validation rejects a non-governance governance id") {
    auto text = read_file(scenario_path("football-slice"));
    REQUIRE(text.ok());
    json j = json::parse(text.value());
    j["governance"] = "v1";
    auto sc = Scenario::from_json(j);
    REQUIRE_FALSE(sc.ok());
    CHECK(sc.code() == Err::ScenarioParseError);
    CHECK(sc.error().message.find("governance") != std::string::npos);
}

TEST_CASE("runs reproduce the golden logs byte for byte") {
    for (const char* name : kScenarios) {
        auto sc = Scenario::load(scenario_path(name));
        REQUIRE(sc.ok());

        Engine engine(sc.value());
        auto run = engine.run("");
        REQUIRE_MESSAGE(run.ok(), name, ": ", run.ok() ? "" : run.error().message);

        auto golden_log = read_file(golden_path(name, ".events.log"));
        REQUIRE(golden_log.ok());
        CHECK_MESSAGE(run.value().log_text == golden_log.value(), name, ": log drifted");

        auto golden_metrics = read_file(golden_path(name, ".metrics.json"));
        REQUIRE(golden_metrics.ok());
        CHECK_MESSAGE(run.value().metrics ==
                          RunMetrics::from_json(json::parse(golden_metrics.value())),
                      name, ": metrics drifted");
    }
}

TEST_CASE("the same scenario and seed give identical bytes twice") {
    auto sc = Scenario::load(scenario_path("football-slice"));
    REQUIRE(sc.ok());
    auto first = Engine(sc.value()).run("");
    auto second = Engine(sc.value()).run("");
    REQUIRE(first.ok());
    REQUIRE(second.ok());
    CHECK(first.value().log_text == second.value().log_text);
}

TEST_CASE("replay reconciles with the recorded metrics") {
    for (const char* name : kScenarios) {
        auto golden_log = read_file(golden_path(name, ".events.log"));
        auto golden_metrics = read_file(golden_path(name, ".metrics.json"));
        REQUIRE(golden_log.ok());
        REQUIRE(golden_metrics.ok());
        auto replayed = replay(golden_log.value());
        REQUIRE(replayed.ok());
        CHECK(replayed.value() == RunMetrics::from_json(json::parse(golden_metrics.value())));
    }
}

TEST_CASE("a truncated log is rejected") {
    auto golden_log = read_file(golden_path("football-slice", ".events.log"));
    REQUIRE(golden_log.ok());
    std::string text = golden_log.value();
    while (!text.empty() && text.back() == '\n') text.pop_back();
    text.erase(text.rfind('\n') + 1);  // drop the footer line
    auto r = replay(text);
    REQUIRE_FALSE(r.ok());
    CHECK(r.code() == Err::CorruptLog);
}

TEST_CASE("an alien log schema is refused") {
    auto golden_log = read_file(golden_path("football-slice", ".events.log"));
    REQUIRE(golden_log.ok());
    std::string text = golden_log.value();
    auto pos = text.find("\"schema\":1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 10, "\"schema\":9");
    auto r = replay(text);
    REQUIRE_FALSE(r.ok());
    CHECK(r.code() == Err::SchemaMismatch);
}

TEST_CASE("running with an output directory writes the artefacts") {
    auto sc = Scenario::load(scenario_path("football-slice"));
    REQUIRE(sc.ok());
    auto dir = std::filesystem::temp_directory_path() / "pdl-test-out";
    std::filesystem::remove_all(dir);
    auto run = Engine(sc.value()).run(dir.string());
    REQUIRE(run.ok());
    CHECK(std::filesystem::exists(dir / "events.log"));
    CHECK(std::filesystem::exists(dir / "metrics.json"));
    auto written = read_file((dir / "events.log").string());
    REQUIRE(written.ok());
    CHECK(written.value() == run.value().log_text);
    std::filesystem::remove_all(dir);
}
