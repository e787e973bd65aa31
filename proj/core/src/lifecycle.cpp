#include "pdl/lifecycle.hpp"

#include <algorithm>

#include "pdl/hash.hpp"

namespace pdl::lifecycle {

// ----------------------------------------------------------------- registry

void ResourceRegistry::declare(const std::string& resource, double capacity) {
    capacity_[resource] = capacity;
}

double ResourceRegistry::capacity(const std::string& resource) const {
    auto it = capacity_.find(resource);
    return it == capacity_.end() ? 0 : it->second;
}

double ResourceRegistry::available(const std::string& resource, Tick from, Tick to) const {
    double used = 0;
    for (const auto& [_, a] : by_sla_)
        if (a.resource == resource && a.from < to && from < a.to) used += a.units;
    return capacity(resource) - used;
}

std::vector<std::string> ResourceRegistry::resource_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : capacity_) out.push_back(id);
    return out;
}

void ResourceRegistry::reserve(const std::string& sla_id, const Allocation& a) {
    by_sla_.emplace(sla_id, a);
}

void ResourceRegistry::release(const std::string& sla_id) { by_sla_.erase(sla_id); }

double ResourceRegistry::allocated_at(const std::string& resource, Tick t) const {
    double used = 0;
    for (const auto& [_, a] : by_sla_)
        if (a.resource == resource && a.from <= t && t < a.to) used += a.units;
    return used;
}

// ------------------------------------------------------------- final report

json FinalReport::to_json() const {
    return json{{"schema", 1},
                {"sla_id", sla_id},
                {"start_tick", start_tick},
                {"end_tick", end_tick},
                {"provider", provider},
                {"customer", customer},
                {"termination_proof",
                 {{"contract_id", termination_proof.contract_id},
                  {"tick", termination_proof.tick},
                  {"cleared_state_hash", termination_proof.cleared_state_hash}}},
                {"violation_count", violation_count},
                {"penalty_accrued", penalty_accrued},
                {"early_termination", early_termination}};
}

// ------------------------------------------------------------- orchestrator

Orchestrator::Orchestrator(ledger::Ledger& ledger, contracts::Runtime& runtime,
                           ResourceRegistry& registry, reports::ReportStore& reports,
                           std::string channel_id, std::string governance)
    : ledger_(ledger),
      runtime_(runtime),
      registry_(registry),
      reports_(reports),
      channel_id_(std::move(channel_id)),
      governance_(std::move(governance)) {}

Status Orchestrator::register_agreement(const sla::Sla& sla, const std::string& it_sc) {
    auto v = sla.validate();
    if (!v) return v;
    if (!runtime_.find(it_sc)) return {Err::UnknownContract, it_sc};
    if (records_.count(sla.sla_id)) return {Err::DuplicateId, sla.sla_id};
    SlaRecord rec;
    rec.sla = sla;
    rec.it_sc = it_sc;
    records_.emplace(sla.sla_id, std::move(rec));
    return ok_status();
}

Result<ResourcePlan> Orchestrator::orchestrate(const std::string& sla_id, Tick now) {
    auto it = records_.find(sla_id);
    if (it == records_.end()) return {Err::NoAgreement, "no agreed terms for " + sla_id};
    SlaRecord& rec = it->second;
    if (rec.plan_state != PlanState::none)
        return {Err::DuplicateId, "plan already exists for " + sla_id};

    double demand = 0;
    if (const sla::Slo* tp = rec.sla.find(sla::Metric::throughput_mbps)) demand = tp->target;

    // greedy first-fit over resources in id order
    std::vector<Allocation> allocations;
    double remaining = demand;
    for (const auto& rid : registry_.resource_ids()) {
        if (remaining <= 0) break;
        double avail = registry_.available(rid, rec.sla.start, rec.sla.end);
        if (avail <= 0) continue;
        double take = std::min(avail, remaining);
        allocations.push_back({rid, take, rec.sla.start, rec.sla.end});
        remaining -= take;
    }
    if (remaining > 0)
        return {Err::InsufficientCapacity,
                "short by " + std::to_string(remaining) + " units"};

    ResourcePlan plan;
    plan.allocations = allocations;
    json alloc_json = json::array();
    for (const auto& a : allocations)
        alloc_json.push_back(json{
            {"resource", a.resource}, {"units", a.units}, {"from", a.from}, {"to", a.to}});
    plan.digest = digest_of(alloc_json);

    json descriptor{{"schema", 1},
                    {"kind", "so-sc"},
                    {"owner", rec.sla.provider},
                    {"state", {{"plan_digest", plan.digest}, {"plan", alloc_json},
                               {"phase", "reserved"}}},
                    {"functions",
                     {{"provision", {{"sets", {{"phase", "active"}}}}},
                      {"release", {{"sets", {{"phase", "released"}}}}}}},
                    {"acl",
                     {{"provision", json::array({rec.sla.provider, governance_})},
                      {"release", json::array({rec.sla.provider, governance_})}}}};
    auto so = runtime_.install_contract(descriptor, channel_id_, rec.sla.provider, now);
    if (!so) return so.error();
    auto act = runtime_.activate(so.value(), rec.sla.provider, now);
    if (!act) return act.error();

    for (const auto& a : allocations) registry_.reserve(sla_id, a);
    plan.so_contract = so.value();
    rec.so_sc = so.value();
    rec.plan = plan;
    rec.plan_state = PlanState::reserved;
    return plan;
}

Result<AccessGrant> Orchestrator::grant_access(const std::string& customer,
                                               const std::string& sla_id, Tick now) {
    auto it = records_.find(sla_id);
    if (it == records_.end()) return {Err::NoAgreement, "no agreed terms for " + sla_id};
    SlaRecord& rec = it->second;
    if (now >= rec.sla.end) return {Err::NoAgreement, "sla validity expired"};
    if (rec.plan_state == PlanState::none)
        return {Err::PlanMissing, "orchestrate before granting access"};

    json descriptor{{"schema", 1},
                    {"kind", "ac-sc"},
                    {"owner", governance_},
                    {"state", {{"access", "granted"}, {"grantee", customer}}},
                    {"functions", {{"revoke", {{"sets", {{"access", "revoked"}}}}}}},
                    {"acl", {{"revoke", json::array({governance_})}}},
                    {"timers", json::array({json{{"timer_id", "revocation"},
                                                 {"fire_at", rec.sla.end},
                                                 {"action", "revoke"}}})}};
    auto ac = runtime_.install_contract(descriptor, channel_id_, governance_, now);
    if (!ac) return ac.error();
    auto act = runtime_.activate(ac.value(), governance_, now);
    if (!act) return act.error();

    AccessGrant grant;
    grant.grantee = customer;
    for (const auto& a : rec.plan.allocations) grant.scope.push_back({a.resource, "use"});
    grant.granted_at = now;
    grant.expires_at = rec.sla.end;
    grant.ac_contract = ac.value();
    rec.ac_sc = ac.value();
    rec.grant = grant;
    return grant;
}

Result<std::string> Orchestrator::initialise(const std::string& sla_id, Tick now) {
    auto it = records_.find(sla_id);
    if (it == records_.end()) return {Err::NoAgreement, "no agreed terms for " + sla_id};
    SlaRecord& rec = it->second;
    if (rec.plan_state != PlanState::reserved)
        return {Err::PlanNotReserved, "plan not in reserved state"};
    if (!rec.grant) return {Err::PlanMissing, "no access grant"};
    if (now > rec.grant->expires_at) return {Err::GrantExpired, "grant already expired"};

    json descriptor{{"schema", 1},
                    {"kind", "generic"},
                    {"owner", rec.sla.provider},
                    {"state",
                     {{"sla_id", sla_id}, {"expired", false}, {"terms_digest",
                       digest_of(rec.sla.to_json())}}},
                    {"functions", {{"expire", {{"sets", {{"expired", true}}}}}}},
                    {"acl", {{"expire", json::array({governance_})}}},
                    {"timers", json::array({json{{"timer_id", "duration"},
                                                 {"fire_at", rec.sla.end},
                                                 {"action", "expire"}}})}};
    auto master = runtime_.install_contract(descriptor, channel_id_, rec.sla.provider, now);
    if (!master) return master;
    auto act = runtime_.activate(master.value(), rec.sla.provider, now);
    if (!act) return act.error();

    // SR-SC: the usage-recording contract executed by the PDLF
    json sr_descriptor{{"schema", 1},
                       {"kind", "sr-sc"},
                       {"owner", rec.sla.provider},
                       {"state", {{"sla_id", sla_id}, {"samples", 0}}},
                       {"functions", {{"note", json::object()}}},
                       {"acl", {{"note", json::array({rec.sla.provider})}}}};
    auto sr = runtime_.install_contract(sr_descriptor, channel_id_, rec.sla.provider, now);
    if (!sr) return sr;
    auto sract = runtime_.activate(sr.value(), rec.sla.provider, now);
    if (!sract) return sract.error();

    // flip the plan reserved -> active
    auto prov = runtime_.invoke(rec.plan.so_contract, "provision", rec.sla.provider,
                                json::object(), now);
    if (!prov) return prov.error();

    rec.master = master.value();
    rec.sr_sc = sr.value();
    rec.plan_state = PlanState::active;
    for (Tick t = rec.sla.start + rec.sla.checkpoint_period; t <= rec.sla.end;
         t += rec.sla.checkpoint_period)
        rec.checkpoints.push_back(t);
    return master;
}

Result<contracts::TerminationProof> Orchestrator::terminate(const std::string& sla_id,
                                                            const std::string& caller,
                                                            Tick now) {
    auto it = records_.find(sla_id);
    if (it == records_.end()) return {Err::NoAgreement, "no agreed terms for " + sla_id};
    SlaRecord& rec = it->second;
    if (rec.proof) return {Err::AlreadyTerminated, sla_id};

    const contracts::Contract* master = runtime_.find(rec.master);
    bool timer_fired =
        master && master->status == contracts::ContractStatus::Active &&
        master->state_vars.value("expired", false);
    bool gov_order = ledger_.is_governance(caller);
    if (!timer_fired && !gov_order && now < rec.sla.end)
        return {Err::NotTerminable, "mid-window termination requires governance"};

    rec.early_termination = now < rec.sla.end;

    auto proof = runtime_.terminate_contract(rec.master, governance_, now);
    if (!proof) return proof;
    if (!rec.ac_sc.empty()) (void)runtime_.terminate_contract(rec.ac_sc, governance_, now);
    if (!rec.so_sc.empty()) (void)runtime_.terminate_contract(rec.so_sc, governance_, now);
    if (!rec.sr_sc.empty()) (void)runtime_.terminate_contract(rec.sr_sc, governance_, now);
    if (!rec.it_sc.empty()) (void)runtime_.terminate_contract(rec.it_sc, governance_, now);

    registry_.release(sla_id);
    rec.plan_state = PlanState::released;
    rec.proof = proof.value();
    rec.terminated_at = now;

    // governance confirms the grant is dead
    if (rec.grant) {
        const contracts::Contract* ac = runtime_.find(rec.grant->ac_contract);
        if (ac && ac->status != contracts::ContractStatus::Terminated)
            (void)runtime_.terminate_contract(rec.grant->ac_contract, governance_, now);
    }
    return proof;
}

Result<FinalReport> Orchestrator::final_report(const std::string& sla_id, Tick now) {
    auto it = records_.find(sla_id);
    if (it == records_.end()) return {Err::NoAgreement, "no agreed terms for " + sla_id};
    SlaRecord& rec = it->second;
    if (!rec.proof) return {Err::NotTerminated, sla_id + " is not terminated"};
    if (rec.master.empty()) return {Err::MissingEvents, "sla never initialised"};

    FinalReport rep;
    rep.sla_id = sla_id;
    rep.start_tick = rec.sla.start;
    rep.end_tick = rec.terminated_at;
    rep.provider = rec.sla.provider;
    rep.customer = rec.sla.customer;
    rep.termination_proof = *rec.proof;
    rep.violation_count = rec.violations.size();
    std::size_t breaches = 0;
    for (const auto& v : rec.violations) breaches += v.failed_metrics;
    rep.penalty_accrued = rec.sla.penalty.accrued(breaches);
    rep.early_termination = rec.early_termination;
    rep.report_digest = digest_of(rep.to_json());

    json body = rep.to_json();
    body["report_digest"] = rep.report_digest;
    reports_.append("final-" + sla_id, body);

    auto tx = ledger::Transaction::make(json{{"type", "governance"},
                                             {"action", "final-report"},
                                             {"sla_id", sla_id},
                                             {"digest", rep.report_digest}},
                                        governance_, ledger::Ledger::kDefaultChannel, now);
    (void)ledger_.submit_transaction(std::move(tx));
    rec.reported = true;
    return rep;
}

std::vector<std::string> Orchestrator::tick(Tick now) {
    std::vector<std::string> ended;
    for (auto& [id, rec] : records_) {
        if (rec.proof || rec.master.empty()) continue;
        const contracts::Contract* master = runtime_.find(rec.master);
        if (!master || master->status != contracts::ContractStatus::Active) continue;
        if (master->state_vars.value("expired", false)) {
            if (terminate(id, contracts::kSystemIdentity, now)) ended.push_back(id);
        }
    }
    return ended;
}

void Orchestrator::note_violation(const std::string& sla_id, const ViolationNote& note) {
    auto it = records_.find(sla_id);
    if (it != records_.end()) it->second.violations.push_back(note);
}

bool Orchestrator::access_live(const std::string& sla_id, Tick now) const {
    auto it = records_.find(sla_id);
    if (it == records_.end() || !it->second.grant) return false;
    const AccessGrant& g = *it->second.grant;
    if (now > g.expires_at) return false;
    const contracts::Contract* ac = runtime_.find(g.ac_contract);
    if (!ac || ac->status != contracts::ContractStatus::Active) return false;
    return ac->state_vars.value("access", "") == "granted";
}

const SlaRecord* Orchestrator::find(const std::string& sla_id) const {
    auto it = records_.find(sla_id);
    return it == records_.end() ? nullptr : &it->second;
}

SlaRecord* Orchestrator::find_mutable(const std::string& sla_id) {
    auto it = records_.find(sla_id);
    return it == records_.end() ? nullptr : &it->second;
}

std::vector<std::string> Orchestrator::sla_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : records_) out.push_back(id);
    return out;
}

}  // namespace pdl::lifecycle
