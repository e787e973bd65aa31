#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdl/common.hpp"
#include "pdl/contracts.hpp"
#include "pdl/lifecycle.hpp"
#include "pdl/reports.hpp"
#include "pdl/sla.hpp"

namespace pdl::monitoring {

using nlohmann::json;

struct UsageSample {
    std::string resource;
    Tick tick = 0;
    sla::Metric metric = sla::Metric::latency_ms;
    double value = 0;

    json to_json() const;
};

struct PdlfState {
    std::string resource;
    bool active = false;
    std::vector<std::pair<std::string, UsageSample>> buffer;  // (sla_id, sample)
    Tick last_report_tick = -1;
    std::size_t dropped = 0;
    std::size_t recorded = 0;
    Tick active_ticks = 0;
};

struct GovernanceReport {
    Tick period_end = 0;
    std::size_t samples = 0;
    std::size_t dropped = 0;
    Tick uptime_ticks = 0;
    std::string digest;
};

enum class Severity { warning, breach };
enum class Action { none, reroute, interrupt };

const char* to_string(Severity s);
const char* to_string(Action a);

struct ViolationEvent {
    std::string sla_id;
    Tick checkpoint_tick = 0;
    std::vector<sla::Metric> failed_metrics;
    Severity severity = Severity::warning;
    Action action = Action::none;
    std::string report_ref;
};

struct CheckpointOutcome {
    bool clean = false;
    std::optional<ViolationEvent> event;
    std::optional<sla::ComplianceResult> compliance;
};

struct Path {
    std::string path_id;
    double capacity = 0;
    double latency_ms = 0;
};

struct Topology {
    std::vector<Path> paths;
    std::string current_path;
};

struct ActionOutcome {
    Action action = Action::none;
    std::string new_path;
};

struct MonitorConfig {
    double warn_margin = 0.1;
    std::size_t batch_payload_limit = 1024;
};

/// Checkpointed SLA evaluation, per-resource PDLF gating, usage recording
/// through SR-SCs, periodic governance reporting and corrective actions.
class Monitor {
  public:
    Monitor(ledger::Ledger& ledger, contracts::Runtime& runtime,
            lifecycle::Orchestrator& orchestrator, reports::ReportStore& reports,
            MonitorConfig cfg, std::string channel_id, std::string governance);

    Status register_resource(const std::string& resource);
    Result<PdlfState> activate_pdlf(const std::string& resource);
    Result<PdlfState> deactivate_pdlf(const std::string& resource, Tick now);
    const PdlfState* pdlf(const std::string& resource) const;

    /// Buffers one sample for later flush; drops (and counts) it if the
    /// resource's PDLF is inactive.
    Result<Unit> record_usage(const std::string& sla_id, const UsageSample& sample);

    /// Commits buffered samples to the ledger under the SLA's channel, as
    /// individual records or one off-chain reference when the batch
    /// serialization exceeds the payload limit.
    Result<std::size_t> flush(Tick now);

    GovernanceReport periodic_report(const std::string& resource, Tick period_end);

    Result<CheckpointOutcome> checkpoint(const std::string& sla_id, Tick window_start,
                                         Tick window_end);

    Result<ActionOutcome> corrective_action(const ViolationEvent& event, Topology& topology,
                                            double demand, Tick now);

    /// Samples recorded for one SLA inside a window.
    std::vector<UsageSample> samples_in_window(const std::string& sla_id, Tick from,
                                               Tick to) const;
    std::size_t total_dropped() const;
    std::size_t total_recorded() const;

    /// Counts one tick of uptime for every active PDLF.
    void note_tick();

  private:
    ledger::Ledger& ledger_;
    contracts::Runtime& runtime_;
    lifecycle::Orchestrator& orchestrator_;
    reports::ReportStore& reports_;
    MonitorConfig cfg_;
    std::string channel_id_;
    std::string governance_;
    std::map<std::string, PdlfState> pdlf_;
    std::map<std::string, std::vector<UsageSample>> by_sla_;
    std::size_t seq_ = 0;
};

// ------------------------------------------------------------------- oracle

enum class Trust { normal, quarantined };

struct OracleFeed {
    std::string feed_id;
    std::string source;
    std::map<Tick, double> readings;
    Trust trust = Trust::normal;
    int strikes = 0;
};

struct OracleConfig {
    double mad_k = 3.0;
    int quarantine_strikes = 3;
};

struct AggregateResult {
    double value = 0;
    std::vector<std::string> flagged;
    std::vector<std::string> quarantined_now;
};

/// Governance-overseen internal oracle: median aggregation with
/// median-absolute-deviation outlier flagging and strike-based quarantine.
class OracleService {
  public:
    OracleService(ledger::Ledger& ledger, std::string governance, OracleConfig cfg = {});

    void add_feed(OracleFeed feed);
    OracleFeed* feed(const std::string& feed_id);
    const std::map<std::string, OracleFeed>& feeds() const { return feeds_; }

    Result<AggregateResult> aggregate(Tick t);

    /// Quarantine is sticky until governance reinstates the feed.
    Status reinstate(const std::string& gov, const std::string& feed_id, Tick now);

  private:
    ledger::Ledger& ledger_;
    std::string governance_;
    OracleConfig cfg_;
    std::map<std::string, OracleFeed> feeds_;
};

double median(std::vector<double> values);

}  // namespace pdl::monitoring
