#include "pdl/monitoring.hpp"

#include <algorithm>
#include <cmath>

#include "pdl/hash.hpp"

namespace pdl::monitoring {

const char* to_string(Severity s) { return s == Severity::warning ? "warning" : "breach"; }

const char* to_string(Action a) {
    switch (a) {
        case Action::none: return "none";
        case Action::reroute: return "reroute";
        case Action::interrupt: return "interrupt";
    }
    return "?";
}

json UsageSample::to_json() const {
    return json{{"resource", resource},
                {"tick", tick},
                {"metric", sla::to_string(metric)},
                {"value", value}};
}

Monitor::Monitor(ledger::Ledger& ledger, contracts::Runtime& runtime,
                 lifecycle::Orchestrator& orchestrator, reports::ReportStore& reports,
                 MonitorConfig cfg, std::string channel_id, std::string governance)
    : ledger_(ledger),
      runtime_(runtime),
      orchestrator_(orchestrator),
      reports_(reports),
      cfg_(cfg),
      channel_id_(std::move(channel_id)),
      governance_(std::move(governance)) {}

Status Monitor::register_resource(const std::string& resource) {
    if (pdlf_.count(resource)) return {Err::DuplicateId, resource};
    PdlfState st;
    st.resource = resource;
    pdlf_.emplace(resource, std::move(st));
    return ok_status();
}

Result<PdlfState> Monitor::activate_pdlf(const std::string& resource) {
    auto it = pdlf_.find(resource);
    if (it == pdlf_.end()) return {Err::UnknownResource, resource};
    it->second.active = true;
    return it->second;
}

Result<PdlfState> Monitor::deactivate_pdlf(const std::string& resource, Tick now) {
    auto it = pdlf_.find(resource);
    if (it == pdlf_.end()) return {Err::UnknownResource, resource};
    if (!it->second.buffer.empty()) (void)flush(now);
    it->second.active = false;
    return it->second;
}

const PdlfState* Monitor::pdlf(const std::string& resource) const {
    auto it = pdlf_.find(resource);
    return it == pdlf_.end() ? nullptr : &it->second;
}

Result<Unit> Monitor::record_usage(const std::string& sla_id, const UsageSample& sample) {
    auto it = pdlf_.find(sample.resource);
    if (it == pdlf_.end()) return {Err::UnknownResource, sample.resource};
    if (!it->second.active) {
        ++it->second.dropped;
        return {Err::PdlfInactive, "pdlf inactive for " + sample.resource};
    }
    const lifecycle::SlaRecord* rec = orchestrator_.find(sla_id);
    if (!rec || rec->sr_sc.empty()) return {Err::ContractNotActive, "no SR-SC for " + sla_id};
    const contracts::Contract* sr = runtime_.find(rec->sr_sc);
    if (!sr || sr->status != contracts::ContractStatus::Active)
        return {Err::ContractNotActive, "SR-SC not active for " + sla_id};
    it->second.buffer.push_back({sla_id, sample});
    return Unit{};
}

Result<std::size_t> Monitor::flush(Tick now) {
    std::size_t flushed = 0;
    for (auto& [rid, st] : pdlf_) {
        if (st.buffer.empty()) continue;
        json batch = json::array();
        for (const auto& [sla_id, s] : st.buffer) {
            json e = s.to_json();
            e["sla_id"] = sla_id;
            batch.push_back(std::move(e));
        }
        std::string bytes = canonical(batch);
        const lifecycle::SlaRecord* rec = orchestrator_.find(st.buffer.front().first);
        std::string submitter = rec ? rec->sla.provider : governance_;

        if (bytes.size() > cfg_.batch_payload_limit && rec) {
            auto ref = runtime_.store_offchain(rec->sr_sc, bytes);
            if (!ref) return ref.error();
            auto tx = ledger::Transaction::make(json{{"type", "usage-batch"},
                                                     {"resource", rid},
                                                     {"count", st.buffer.size()},
                                                     {"ref", ref.value()},
                                                     {"seq", ++seq_}},
                                                submitter, channel_id_, now);
            auto r = ledger_.submit_transaction(std::move(tx));
            if (!r) return {Err::CommitFailed, r.error().message};
        } else {
            for (const auto& [sla_id, s] : st.buffer) {
                json payload = s.to_json();
                payload["type"] = "usage";
                payload["sla_id"] = sla_id;
                payload["seq"] = ++seq_;
                auto tx = ledger::Transaction::make(std::move(payload), submitter, channel_id_,
                                                    now);
                auto r = ledger_.submit_transaction(std::move(tx));
                if (!r) return {Err::CommitFailed, r.error().message};
            }
        }
        for (auto& [sla_id, s] : st.buffer) by_sla_[sla_id].push_back(s);
        st.recorded += st.buffer.size();
        flushed += st.buffer.size();
        st.buffer.clear();
    }
    return flushed;
}

GovernanceReport Monitor::periodic_report(const std::string& resource, Tick period_end) {
    GovernanceReport rep;
    rep.period_end = period_end;
    auto it = pdlf_.find(resource);
    if (it != pdlf_.end()) {
        rep.samples = it->second.recorded;
        rep.dropped = it->second.dropped;
        rep.uptime_ticks = it->second.active_ticks;
        it->second.last_report_tick = period_end;
    }
    json body{{"type", "pdlf-periodic"},
              {"resource", resource},
              {"period_end", period_end},
              {"samples", rep.samples},
              {"dropped", rep.dropped},
              {"uptime_ticks", rep.uptime_ticks}};
    rep.digest = digest_of(body);
    body["digest"] = rep.digest;
    reports_.append("pdlf-" + resource + "-" + std::to_string(period_end), body);
    return rep;
}

std::vector<UsageSample> Monitor::samples_in_window(const std::string& sla_id, Tick from,
                                                    Tick to) const {
    std::vector<UsageSample> out;
    auto it = by_sla_.find(sla_id);
    if (it == by_sla_.end()) return out;
    for (const auto& s : it->second)
        if (s.tick >= from && s.tick < to) out.push_back(s);
    return out;
}

std::size_t Monitor::total_dropped() const {
    std::size_t n = 0;
    for (const auto& [_, st] : pdlf_) n += st.dropped;
    return n;
}

std::size_t Monitor::total_recorded() const {
    std::size_t n = 0;
    for (const auto& [_, st] : pdlf_) n += st.recorded;
    return n;
}

void Monitor::note_tick() {
    for (auto& [_, st] : pdlf_)
        if (st.active) ++st.active_ticks;
}

Result<CheckpointOutcome> Monitor::checkpoint(const std::string& sla_id, Tick window_start,
                                              Tick window_end) {
    const lifecycle::SlaRecord* rec = orchestrator_.find(sla_id);
    if (!rec) return {Err::NoAgreement, sla_id};
    const contracts::Contract* master = runtime_.find(rec->master);
    if (!master || master->status != contracts::ContractStatus::Active)
        return {Err::ContractNotActive, "master contract not active for " + sla_id};

    auto samples = samples_in_window(sla_id, window_start, window_end);
    CheckpointOutcome out;
    if (samples.empty()) {
        ViolationEvent ev;
        ev.sla_id = sla_id;
        ev.checkpoint_tick = window_end;
        ev.severity = Severity::warning;
        ev.action = Action::none;
        out.event = std::move(ev);
        return out;
    }

    // aggregate: mean per metric (availability samples are 0/1 up indicators,
    // so the mean is the fraction of up ticks)
    std::map<sla::Metric, std::pair<double, std::size_t>> acc;
    for (const auto& s : samples) {
        auto& a = acc[s.metric];
        a.first += s.value;
        ++a.second;
    }
    sla::Measurements measured;
    for (const auto& [m, a] : acc) measured[m] = a.first / static_cast<double>(a.second);

    auto compliance = sla::evaluate(rec->sla, measured, window_start, window_end);
    if (!compliance) return compliance.error();
    out.compliance = compliance.value();

    if (compliance.value().breach_count == 0) {
        out.clean = true;
        return out;
    }

    ViolationEvent ev;
    ev.sla_id = sla_id;
    ev.checkpoint_tick = window_end;
    for (const auto& [m, met] : compliance.value().verdicts)
        if (!met) ev.failed_metrics.push_back(m);

    // a single near-miss is a warning, anything more a breach
    bool warning_only = false;
    if (ev.failed_metrics.size() == 1) {
        sla::Metric m = ev.failed_metrics.front();
        const sla::Slo* slo = rec->sla.find(m);
        double v = measured.at(m);
        double margin = slo->target != 0 ? std::abs(v - slo->target) / std::abs(slo->target)
                                         : std::abs(v - slo->target);
        warning_only = margin < cfg_.warn_margin;
    }
    if (warning_only) {
        ev.severity = Severity::warning;
        ev.action = Action::none;
    } else {
        ev.severity = Severity::breach;
        json body{{"type", "violation"},
                  {"sla_id", sla_id},
                  {"checkpoint_tick", ev.checkpoint_tick},
                  {"breach_count", compliance.value().breach_count},
                  {"penalty", compliance.value().accrued_penalty}};
        ev.report_ref = reports_.append(
            "violation-" + sla_id + "-" + std::to_string(ev.checkpoint_tick), body);
        auto tx = ledger::Transaction::make(body, governance_, channel_id_, window_end);
        (void)ledger_.submit_transaction(std::move(tx));
        orchestrator_.note_violation(
            sla_id, {ev.checkpoint_tick, ev.failed_metrics.size(),
                     compliance.value().accrued_penalty});
    }
    out.event = std::move(ev);
    return out;
}

Result<ActionOutcome> Monitor::corrective_action(const ViolationEvent& event,
                                                 Topology& topology, double demand, Tick now) {
    if (event.severity != Severity::breach)
        return {Err::TransitionFailed, "corrective action requires breach severity"};

    ActionOutcome out;
    const Path* best = nullptr;
    for (const auto& p : topology.paths) {
        if (p.path_id == topology.current_path) continue;
        if (p.capacity < demand) continue;
        if (!best || p.path_id < best->path_id) best = &p;
    }
    const lifecycle::SlaRecord* rec = orchestrator_.find(event.sla_id);
    if (best) {
        topology.current_path = best->path_id;
        out.action = Action::reroute;
        out.new_path = best->path_id;
        auto tx = ledger::Transaction::make(json{{"type", "corrective"},
                                                 {"action", "reroute"},
                                                 {"sla_id", event.sla_id},
                                                 {"path", best->path_id},
                                                 {"tick", now}},
                                            governance_, channel_id_, now);
        (void)ledger_.submit_transaction(std::move(tx));
    } else {
        out.action = Action::interrupt;
        if (rec && !rec->master.empty()) {
            contracts::ControlInstruction instr;
            instr.issuer = governance_;
            instr.target = rec->master;
            instr.command = contracts::Command::interrupt;
            instr.tick = now;
            (void)runtime_.apply_control(instr);
        }
    }
    json body{{"type", "corrective-report"},
              {"sla_id", event.sla_id},
              {"action", to_string(out.action)},
              {"tick", now}};
    reports_.append("corrective-" + event.sla_id + "-" + std::to_string(now), body);
    return out;
}

// ------------------------------------------------------------------- oracle

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n == 0) return 0;
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

OracleService::OracleService(ledger::Ledger& ledger, std::string governance, OracleConfig cfg)
    : ledger_(ledger), governance_(std::move(governance)), cfg_(cfg) {}

void OracleService::add_feed(OracleFeed feed) { feeds_[feed.feed_id] = std::move(feed); }

OracleFeed* OracleService::feed(const std::string& feed_id) {
    auto it = feeds_.find(feed_id);
    return it == feeds_.end() ? nullptr : &it->second;
}

Result<AggregateResult> OracleService::aggregate(Tick t) {
    std::vector<std::pair<std::string, double>> live;
    for (auto& [id, f] : feeds_) {
        if (f.trust == Trust::quarantined) continue;
        auto rit = f.readings.find(t);
        if (rit != f.readings.end()) live.push_back({id, rit->second});
    }
    if (live.size() < 3)
        return {Err::InsufficientFeeds,
                "need >= 3 live feeds, have " + std::to_string(live.size())};

    std::vector<double> values;
    for (const auto& [_, v] : live) values.push_back(v);
    AggregateResult res;
    res.value = median(values);

    std::vector<double> devs;
    for (double v : values) devs.push_back(std::abs(v - res.value));
    double mad = median(devs);

    for (const auto& [id, v] : live) {
        OracleFeed& f = feeds_.at(id);
        if (std::abs(v - res.value) > cfg_.mad_k * mad) {
            res.flagged.push_back(id);
            ++f.strikes;
            if (f.strikes >= cfg_.quarantine_strikes && f.trust == Trust::normal) {
                f.trust = Trust::quarantined;
                res.quarantined_now.push_back(id);
                auto tx = ledger::Transaction::make(json{{"type", "governance"},
                                                         {"action", "feed-quarantine"},
                                                         {"feed", id},
                                                         {"tick", t}},
                                                    governance_,
                                                    ledger::Ledger::kDefaultChannel, t);
                (void)ledger_.submit_transaction(std::move(tx));
            }
        } else {
            f.strikes = 0;  // strikes must be consecutive
        }
    }
    return res;
}

Status OracleService::reinstate(const std::string& gov, const std::string& feed_id, Tick now) {
    if (!ledger_.is_governance(gov)) return {Err::NotGovernance, gov};
    auto it = feeds_.find(feed_id);
    if (it == feeds_.end()) return {Err::NotFound, feed_id};
    it->second.trust = Trust::normal;
    it->second.strikes = 0;
    auto tx = ledger::Transaction::make(
        json{{"type", "governance"}, {"action", "feed-reinstate"}, {"feed", feed_id},
             {"tick", now}},
        gov, ledger::Ledger::kDefaultChannel, now);
    (void)ledger_.submit_transaction(std::move(tx));
    return ok_status();
}

}  // namespace pdl::monitoring
