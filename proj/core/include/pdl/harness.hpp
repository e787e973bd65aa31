#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdl/common.hpp"
#include "pdl/contracts.hpp"
#include "pdl/intent.hpp"
#include "pdl/interop.hpp"
#include "pdl/ledger.hpp"
#include "pdl/lifecycle.hpp"
#include "pdl/monitoring.hpp"
#include "pdl/reports.hpp"
#include "pdl/sla.hpp"

namespace pdl::harness {

using nlohmann::json;

inline constexpr int kLogSchema = 1;

struct NodeSpec {
    std::string id;
    ledger::Role role = ledger::Role::validator;
};

struct ChannelSpec {
    std::string id;
    std::string creator;
    std::set<std::string> members;
};

struct LedgerSpec {
    std::string id = "pdl";
    ledger::LedgerConfig cfg;
    std::vector<NodeSpec> nodes;
    std::vector<ChannelSpec> channels;
};

struct IntentSpec {
    Tick tick = 0;
    std::string customer;
    std::string text;
    Tick checkpoint_period = 10;
    sla::PenaltyRule penalty{1.0, 100.0};
    std::vector<intent::CustomerResponse> responses;  // empty means accept at once
};

struct FaultSpec {
    Tick tick = 0;
    std::string kind;
    json params;
};

/// Declarative run description. Identical scenario plus seed yields a
/// byte-identical event log.
struct Scenario {
    int schema = 1;
    std::string name;
    std::uint64_t seed = 0;
    Tick duration = 100;
    LedgerSpec ledger;
    std::optional<LedgerSpec> secondary;
    std::string governance;
    std::string main_channel = ledger::Ledger::kDefaultChannel;
    std::vector<std::pair<std::string, double>> resources;  // (id, capacity)
    std::vector<sla::ServiceOffering> catalogue;
    intent::PresetTable presets = intent::PresetTable::defaults();
    std::vector<IntentSpec> intents;
    std::vector<FaultSpec> faults;
    monitoring::Topology topology;

    bool has_oracle = false;
    std::vector<std::string> oracle_feeds;
    double oracle_base = 0;

    std::optional<interop::TranslationTable> relay_table;
    interop::RelayConfig relay_cfg;

    static Result<Scenario> from_json(const json& j);
    /// Parse failures carry a line number in the message.
    static Result<Scenario> load(const std::string& path);
    Status validate() const;
};

struct RunMetrics {
    std::uint64_t committed_tx = 0;
    std::uint64_t rejected_tx = 0;
    std::uint64_t violations = 0;
    double mean_detection_latency = 0;
    double penalties_accrued = 0;
    std::uint64_t transfers_committed = 0;
    std::uint64_t transfers_aborted = 0;

    bool operator==(const RunMetrics&) const = default;
    json to_json() const;
    static RunMetrics from_json(const json& j);
    /// Single source of truth: both run and replay derive metrics from the
    /// event records, so counts reconcile with the log by construction.
    static RunMetrics from_events(const std::vector<json>& events);
};

struct RunResult {
    RunMetrics metrics;
    std::vector<json> events;
    std::string log_text;  // exact bytes of the event log
};

/// Deterministic single-threaded scenario driver over all library modules,
/// with per-tick invariant sweeps.
class Engine {
  public:
    explicit Engine(Scenario sc);
    ~Engine();

    /// Runs to scenario duration (or `until`, if smaller) and, when out_dir is
    /// non-empty, writes events.log, metrics.json, chain exports and reports.
    Result<RunResult> run(const std::string& out_dir, std::optional<Tick> until = {});

  private:
    struct Override {
        sla::Metric metric = sla::Metric::latency_ms;
        double value = 0;
        Tick from = 0;
        Tick to = 0;
    };

    void emit(Tick t, const std::string& module, const std::string& kind, json extra);
    Status setup();
    Status apply_fault(const FaultSpec& f, Tick t);
    Status start_intent(const IntentSpec& spec, Tick t);
    void generate_samples(Tick t);
    Status run_checkpoints(Tick t);
    void run_oracle(Tick t);
    void run_relay(Tick t);
    Status consensus_sweep(Tick t);
    Status invariant_sweep(Tick t);
    void write_outputs(const std::string& out_dir, const RunResult& result);

    Scenario sc_;
    std::mt19937_64 rng_;
    std::vector<json> events_;

    ledger::Ledger ledger_;
    std::unique_ptr<ledger::Ledger> secondary_;
    contracts::Runtime runtime_;
    lifecycle::ResourceRegistry registry_;
    reports::ReportStore reports_;
    lifecycle::Orchestrator orchestrator_;
    monitoring::Monitor monitor_;
    std::unique_ptr<monitoring::OracleService> oracle_;
    std::unique_ptr<interop::RelayCoordinator> relay_;

    struct FeedDeviation {
        std::string feed;
        double delta = 0;
        Tick from = 0;
        Tick to = 0;
    };

    std::vector<Override> overrides_;
    std::vector<FeedDeviation> feed_dev_;
    std::map<std::string, Tick> intent_start_;                  // sla_id -> agreement tick
    std::map<std::string, interop::Phase> relay_phase_;         // transfer -> last seen phase
    std::map<std::string, std::pair<std::uint64_t, std::string>> tips_;  // append-only check
    Status failure_ = ok_status();
};

/// Recomputes RunMetrics from an event log without re-simulation.
Result<RunMetrics> replay(const std::string& log_text);

Result<std::string> read_file(const std::string& path);
Status write_file(const std::string& path, const std::string& content);

}  // namespace pdl::harness
