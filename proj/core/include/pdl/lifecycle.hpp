#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdl/common.hpp"
#include "pdl/contracts.hpp"
#include "pdl/reports.hpp"
#include "pdl/sla.hpp"

namespace pdl::lifecycle {

using nlohmann::json;

struct Allocation {
    std::string resource;
    double units = 0;
    Tick from = 0;
    Tick to = 0;
};

/// Declared capacities plus current reservations. Reserved and active
/// allocations both hold capacity.
class ResourceRegistry {
  public:
    void declare(const std::string& resource, double capacity);
    bool has(const std::string& resource) const { return capacity_.count(resource) > 0; }
    double capacity(const std::string& resource) const;
    double available(const std::string& resource, Tick from, Tick to) const;
    std::vector<std::string> resource_ids() const;

    void reserve(const std::string& sla_id, const Allocation& a);
    void release(const std::string& sla_id);
    /// Sum of overlapping allocations at one tick, per resource.
    double allocated_at(const std::string& resource, Tick t) const;

  private:
    std::map<std::string, double> capacity_;
    std::multimap<std::string, Allocation> by_sla_;
};

struct AccessGrant {
    std::string grantee;
    std::vector<std::pair<std::string, std::string>> scope;  // (resource, permission)
    Tick granted_at = 0;
    Tick expires_at = 0;
    std::string ac_contract;
};

struct ResourcePlan {
    std::vector<Allocation> allocations;
    std::string so_contract;
    std::string digest;
};

enum class PlanState { none, reserved, active, released };

struct FinalReport {
    std::string sla_id;
    Tick start_tick = 0;
    Tick end_tick = 0;
    std::string provider;
    std::string customer;
    contracts::TerminationProof termination_proof;
    std::size_t violation_count = 0;
    double penalty_accrued = 0;
    bool early_termination = false;
    std::string report_digest;

    json to_json() const;
};

struct ViolationNote {
    Tick checkpoint_tick = 0;
    std::size_t failed_metrics = 0;
    double penalty = 0;
};

/// Everything the orchestrator tracks for one SLA through its lifecycle.
struct SlaRecord {
    sla::Sla sla;
    std::string it_sc;
    std::string so_sc;
    std::string ac_sc;
    std::string sr_sc;
    std::string master;
    ResourcePlan plan;
    PlanState plan_state = PlanState::none;
    std::optional<AccessGrant> grant;
    std::vector<Tick> checkpoints;
    std::vector<ViolationNote> violations;
    std::optional<contracts::TerminationProof> proof;
    Tick terminated_at = 0;
    bool early_termination = false;
    bool reported = false;
};

/// Drives discovery, access grant, orchestration, contract initialisation,
/// termination and final reporting for each SLA.
class Orchestrator {
  public:
    Orchestrator(ledger::Ledger& ledger, contracts::Runtime& runtime, ResourceRegistry& registry,
                 reports::ReportStore& reports, std::string channel_id, std::string governance);

    /// Binds an agreed SLA to its recorded IT-SC.
    Status register_agreement(const sla::Sla& sla, const std::string& it_sc);

    Result<ResourcePlan> orchestrate(const std::string& sla_id, Tick now);
    Result<AccessGrant> grant_access(const std::string& customer, const std::string& sla_id,
                                     Tick now);
    Result<std::string> initialise(const std::string& sla_id, Tick now);
    Result<contracts::TerminationProof> terminate(const std::string& sla_id,
                                                  const std::string& caller, Tick now);
    Result<FinalReport> final_report(const std::string& sla_id, Tick now);

    /// Ends every SLA whose duration timer has fired; returns the ids ended.
    std::vector<std::string> tick(Tick now);

    void note_violation(const std::string& sla_id, const ViolationNote& note);
    bool access_live(const std::string& sla_id, Tick now) const;

    const SlaRecord* find(const std::string& sla_id) const;
    std::vector<std::string> sla_ids() const;
    SlaRecord* find_mutable(const std::string& sla_id);

  private:
    ledger::Ledger& ledger_;
    contracts::Runtime& runtime_;
    ResourceRegistry& registry_;
    reports::ReportStore& reports_;
    std::string channel_id_;
    std::string governance_;
    std::map<std::string, SlaRecord> records_;
};

}  // namespace pdl::lifecycle
