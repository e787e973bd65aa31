#include <algorithm>
#include <filesystem>

#include "pdl/harness.hpp"
#include "pdl/hash.hpp"

namespace pdl::harness {

namespace fs = std::filesystem;

Engine::Engine(Scenario sc)
    : sc_(std::move(sc)),
      rng_(sc_.seed),
      ledger_(sc_.ledger.cfg, sc_.ledger.id),
      runtime_(ledger_),
      orchestrator_(ledger_, runtime_, registry_, reports_, sc_.main_channel, sc_.governance),
      monitor_(ledger_, runtime_, orchestrator_, reports_, monitoring::MonitorConfig{},
               sc_.main_channel, sc_.governance) {}

Engine::~Engine() = default;

void Engine::emit(Tick t, const std::string& module, const std::string& kind, json extra) {
    extra["tick"] = t;
    extra["module"] = module;
    extra["kind"] = kind;
    events_.push_back(std::move(extra));
}

Status Engine::setup() {
    auto build = [this](ledger::Ledger& l, const LedgerSpec& spec) -> Status {
        for (const auto& n : spec.nodes) {
            auto r = l.node_join(n.id, n.role);
            if (!r) return r.error();
        }
        for (const auto& ch : spec.channels) {
            auto r = l.create_channel(ch.creator, ch.members, ch.id);
            if (!r) return r.error();
            emit(0, "ledger", "channel-created", {{"ledger", l.id()}, {"channel", ch.id}});
        }
        return ok_status();
    };
    auto s = build(ledger_, sc_.ledger);
    if (!s) return s;
    if (sc_.secondary) {
        secondary_ = std::make_unique<ledger::Ledger>(sc_.secondary->cfg, sc_.secondary->id);
        s = build(*secondary_, *sc_.secondary);
        if (!s) return s;
    }

    for (const auto& [rid, cap] : sc_.resources) {
        registry_.declare(rid, cap);
        auto r = monitor_.register_resource(rid);
        if (!r) return r;
        auto a = monitor_.activate_pdlf(rid);
        if (!a) return a.error();
    }

    if (sc_.has_oracle) {
        oracle_ = std::make_unique<monitoring::OracleService>(ledger_, sc_.governance);
        for (const auto& f : sc_.oracle_feeds)
            oracle_->add_feed(monitoring::OracleFeed{f, f, {}, monitoring::Trust::normal, 0});
    }

    if (sc_.relay_table) {
        relay_ = std::make_unique<interop::RelayCoordinator>(
            ledger_, *secondary_, sc_.governance, *sc_.relay_table, sc_.relay_cfg);
    }
    return ok_status();
}

Status Engine::apply_fault(const FaultSpec& f, Tick t) {
    const json& p = f.params;
    if (f.kind == "node-leave") {
        auto r = ledger_.node_leave(p.at("node").get<std::string>());
        if (!r) return r.error();
        emit(t, "ledger", "node-leave",
             {{"node", p.at("node")},
              {"active", r.value().active_validators},
              {"below_min_active", r.value().below_min_active},
              {"quorum", ledger_.quorum(sc_.main_channel)}});
    } else if (f.kind == "node-join") {
        auto role = ledger::role_from_string(p.value("role", "validator"));
        auto r = ledger_.node_join(p.at("node").get<std::string>(), role);
        if (!r) return r.error();
        emit(t, "ledger", "node-join",
             {{"node", p.at("node")},
              {"active", r.value().active_validators},
              {"quorum", r.value().next_quorum}});
    } else if (f.kind == "collude") {
        for (const auto& n : p.at("nodes")) {
            ledger_.set_vote_policy(n.get<std::string>(),
                                    [](const ledger::Transaction&) { return false; });
            emit(t, "ledger", "collusion-scripted", {{"node", n}});
        }
    } else if (f.kind == "submit-tx") {
        auto tx = ledger::Transaction::make(p.at("payload"),
                                            p.value("submitter", sc_.governance),
                                            p.value("channel", sc_.main_channel), t);
        std::string id = tx.tx_id;
        auto r = ledger_.submit_transaction(std::move(tx));
        emit(t, "ledger", "tx-submitted",
             {{"tx", id}, {"accepted", r.ok()},
              {"error", r.ok() ? "" : to_string(r.code())}});
    } else if (f.kind == "detect-collusion") {
        auto r = ledger_.detect_collusion(p.value("channel", sc_.main_channel),
                                          p.value("from", Tick{0}), p.value("to", t));
        if (!r) return r.error();
        json flagged = json::array();
        for (const auto& n : r.value()) flagged.push_back(n);
        emit(t, "ledger", "collusion-detected", {{"nodes", flagged}});
        for (const auto& n : r.value()) {
            auto b = ledger_.blacklist_node(sc_.governance, n, "collusion", t);
            emit(t, "ledger", "blacklist", {{"node", n}, {"ok", b.ok()}});
        }
    } else if (f.kind == "metric-spike") {
        Override o;
        o.metric = sla::metric_from_string(p.at("metric").get<std::string>());
        o.value = p.at("value").get<double>();
        o.from = t;
        o.to = t + p.value("duration", Tick{1});
        overrides_.push_back(o);
        emit(t, "harness", "fault-injected",
             {{"fault", "metric-spike"}, {"metric", p.at("metric")}, {"value", o.value},
              {"until", o.to}});
    } else if (f.kind == "feed-deviate") {
        for (const auto& fd : p.at("feeds")) {
            feed_dev_.push_back({fd.get<std::string>(), p.at("delta").get<double>(), t,
                                 t + p.value("duration", Tick{1})});
            emit(t, "oracle", "feed-deviate",
                 {{"feed", fd}, {"delta", p.at("delta")}, {"until", t + p.value("duration", Tick{1})}});
        }
    } else if (f.kind == "feed-reinstate") {
        if (!oracle_) return {Err::ScenarioParseError, "feed-reinstate without oracle"};
        auto r = oracle_->reinstate(sc_.governance, p.at("feed").get<std::string>(), t);
        emit(t, "oracle", "feed-reinstate", {{"feed", p.at("feed")}, {"ok", r.ok()}});
    } else if (f.kind == "weighted-compose") {
        auto npn = sla::Sla::from_json(p.at("npn"));
        if (!npn) return npn.error();
        auto plmn = sla::Sla::from_json(p.at("plmn"));
        if (!plmn) return plmn.error();
        auto composed = sla::compose_weighted(npn.value(), plmn.value(),
                                              p.at("weight").get<double>());
        if (!composed) return composed.error();
        json targets = json::object();
        for (const auto& s : composed.value().slos)
            targets[sla::to_string(s.metric)] = s.target;
        emit(t, "sla", "weighted-compose",
             {{"weight", p.at("weight")}, {"sla_id", composed.value().sla_id},
              {"targets", targets}});
        reports_.append("handover-" + std::to_string(t),
                        json{{"type", "handover"}, {"tick", t},
                             {"composed", composed.value().to_json()}});
    } else if (f.kind == "relay-transfer") {
        if (!relay_ || !secondary_)
            return {Err::ScenarioParseError, "relay-transfer without relay section"};
        std::string src_channel = p.value("src_channel",
                                          std::string(ledger::Ledger::kDefaultChannel));
        auto tx = ledger::Transaction::make(p.at("payload"), sc_.governance, src_channel, t);
        std::string tx_id = tx.tx_id;
        auto sub = ledger_.submit_transaction(std::move(tx));
        if (!sub) return sub.error();
        auto round = ledger_.run_consensus_round(src_channel, t);
        if (round)
            emit(t, "ledger", "consensus",
                 {{"ledger", ledger_.id()}, {"channel", src_channel},
                  {"committed", round.value().committed.size()},
                  {"rejected", round.value().rejected.size()},
                  {"height", round.value().block_height ? *round.value().block_height : 0}});
        auto xfer = relay_->start_transfer(
            ledger_.id(), src_channel, tx_id,
            p.value("dst_channel", std::string(ledger::Ledger::kDefaultChannel)),
            p.value("src_ver", 1), p.value("dst_ver", 1), p.value("deadline", Tick{10}), t);
        if (!xfer) {
            emit(t, "interop", "transfer-failed", {{"error", to_string(xfer.code())}});
        } else {
            emit(t, "interop", "transfer-started",
                 {{"transfer", xfer.value()}, {"src_tx", tx_id}});
            relay_phase_[xfer.value()] = interop::Phase::proposed;
        }
    } else if (f.kind == "audit") {
        auto r = ledger_.audit_node(sc_.governance, p.at("node").get<std::string>(), t);
        if (!r) return r.error();
        emit(t, "ledger", "audit", {{"node", p.at("node")}, {"suspect", r.value().suspect()}});
    } else if (f.kind == "replica-tamper") {
        auto r = ledger_.inject_replica_tamper(p.at("node").get<std::string>());
        if (!r) return r;
        emit(t, "harness", "fault-injected",
             {{"fault", "replica-tamper"}, {"node", p.at("node")}});
    } else if (f.kind == "deactivate-pdlf") {
        auto r = monitor_.deactivate_pdlf(p.at("resource").get<std::string>(), t);
        if (!r) return r.error();
        emit(t, "monitoring", "pdlf-deactivated", {{"resource", p.at("resource")}});
    } else if (f.kind == "activate-pdlf") {
        auto r = monitor_.activate_pdlf(p.at("resource").get<std::string>());
        if (!r) return r.error();
        emit(t, "monitoring", "pdlf-activated", {{"resource", p.at("resource")}});
    } else {
        return {Err::ScenarioParseError, "unknown fault kind: " + f.kind};
    }
    return ok_status();
}

Status Engine::start_intent(const IntentSpec& spec, Tick t) {
    intent::ParseDiag diag;
    auto ast = intent::parse_intent(spec.text, sc_.presets, &diag);
    if (!ast) {
        emit(t, "intent", "intent-failed",
             {{"customer", spec.customer}, {"error", to_string(ast.code())},
              {"position", diag.position}});
        return ok_status();
    }
    emit(t, "intent", "intent-parsed",
         {{"customer", spec.customer}, {"canonical", ast.value().print()}});

    intent::NegotiationSession session(ast.value(), sc_.catalogue, sc_.presets, spec.customer);
    if (!session.open_error()) {
        emit(t, "intent", "negotiation-failed",
             {{"customer", spec.customer}, {"error", to_string(session.open_error().code())}});
        return ok_status();
    }
    emit(t, "intent", "proposal",
         {{"round", session.round()}, {"offering", session.current().offering_id},
          {"price", session.current().price}});

    std::optional<intent::AgreedTerms> terms;
    std::vector<intent::CustomerResponse> responses = spec.responses;
    if (responses.empty()) responses.push_back({true, {}});
    for (const auto& resp : responses) {
        auto out = session.refine(resp);
        if (!out) {
            emit(t, "intent", "negotiation-failed",
                 {{"customer", spec.customer}, {"error", to_string(out.code())}});
            return ok_status();
        }
        if (out.value().agreed) {
            terms = out.value().agreed;
            break;
        }
        emit(t, "intent", "counter-proposal",
             {{"round", session.round()}, {"offering", session.current().offering_id},
              {"price", session.current().price}});
    }
    if (!terms) {
        emit(t, "intent", "negotiation-stalled", {{"customer", spec.customer}});
        return ok_status();
    }

    sla::Sla s;
    s.sla_id = "sla-" + terms->digest().substr(0, 12);
    s.provider = terms->provider;
    s.customer = terms->customer;
    s.slos = terms->slos;
    s.start = terms->window_start > t ? terms->window_start : t + 1;
    s.end = s.start + terms->window_duration;
    s.checkpoint_period = spec.checkpoint_period;
    s.penalty = spec.penalty;

    auto it_sc = intent::record_agreement(runtime_, *terms, sc_.main_channel, spec.customer, t);
    if (!it_sc) {
        emit(t, "intent", "intent-failed",
             {{"customer", spec.customer}, {"error", to_string(it_sc.code())}});
        return ok_status();
    }
    emit(t, "intent", "agreement",
         {{"sla_id", s.sla_id}, {"offering", terms->offering_id}, {"price", terms->price},
          {"it_sc", it_sc.value()}});

    auto reg = orchestrator_.register_agreement(s, it_sc.value());
    if (!reg) {
        emit(t, "lifecycle", "lifecycle-failed",
             {{"sla_id", s.sla_id}, {"step", "register"}, {"error", to_string(reg.code())}});
        return ok_status();
    }
    auto plan = orchestrator_.orchestrate(s.sla_id, t);
    if (!plan) {
        emit(t, "lifecycle", "lifecycle-failed",
             {{"sla_id", s.sla_id}, {"step", "orchestrate"}, {"error", to_string(plan.code())}});
        return ok_status();
    }
    emit(t, "lifecycle", "orchestrated",
         {{"sla_id", s.sla_id}, {"allocations", plan.value().allocations.size()},
          {"so_sc", plan.value().so_contract}});
    auto grant = orchestrator_.grant_access(spec.customer, s.sla_id, t);
    if (!grant) {
        emit(t, "lifecycle", "lifecycle-failed",
             {{"sla_id", s.sla_id}, {"step", "grant"}, {"error", to_string(grant.code())}});
        return ok_status();
    }
    emit(t, "lifecycle", "access-granted",
         {{"sla_id", s.sla_id}, {"grantee", spec.customer},
          {"expires", grant.value().expires_at}});
    auto master = orchestrator_.initialise(s.sla_id, t);
    if (!master) {
        emit(t, "lifecycle", "lifecycle-failed",
             {{"sla_id", s.sla_id}, {"step", "initialise"},
              {"error", to_string(master.code())}});
        return ok_status();
    }
    emit(t, "lifecycle", "initialised", {{"sla_id", s.sla_id}, {"master", master.value()}});
    intent_start_[s.sla_id] = t;
    return ok_status();
}

void Engine::generate_samples(Tick t) {
    std::uniform_real_distribution<double> jitter(-0.01, 0.01);
    for (const auto& id : orchestrator_.sla_ids()) {
        const lifecycle::SlaRecord* rec = orchestrator_.find(id);
        if (!rec || rec->proof || rec->plan_state != lifecycle::PlanState::active) continue;
        if (t < rec->sla.start || t >= rec->sla.end) continue;
        if (!orchestrator_.access_live(id, t)) continue;
        if (rec->plan.allocations.empty()) continue;
        const std::string& resource = rec->plan.allocations.front().resource;
        for (const auto& slo : rec->sla.slos) {
            double j = jitter(rng_);
            double value = 0;
            switch (slo.metric) {
                case sla::Metric::latency_ms: value = slo.target * 0.8 * (1 + j); break;
                case sla::Metric::availability_fraction: value = 1.0; break;
                case sla::Metric::throughput_mbps: value = slo.target * 1.1 * (1 + j); break;
                case sla::Metric::packet_loss_fraction: value = slo.target * 0.5 * (1 + j);
                    break;
            }
            for (const auto& o : overrides_)
                if (o.metric == slo.metric && o.from <= t && t < o.to) value = o.value;
            monitoring::UsageSample sample{resource, t, slo.metric, value};
            (void)monitor_.record_usage(id, sample);
        }
    }
}

Status Engine::run_checkpoints(Tick t) {
    for (const auto& id : orchestrator_.sla_ids()) {
        const lifecycle::SlaRecord* rec = orchestrator_.find(id);
        if (!rec || rec->proof || rec->master.empty()) continue;
        if (std::find(rec->checkpoints.begin(), rec->checkpoints.end(), t) ==
            rec->checkpoints.end())
            continue;
        Tick ws = t - rec->sla.checkpoint_period;
        auto out = monitor_.checkpoint(id, ws, t);
        if (!out) {
            emit(t, "monitoring", "checkpoint-error",
                 {{"sla_id", id}, {"error", to_string(out.code())}});
            continue;
        }
        if (out.value().clean) {
            emit(t, "monitoring", "checkpoint", {{"sla_id", id}, {"clean", true}});
            continue;
        }
        if (!out.value().event) continue;
        const monitoring::ViolationEvent& ev = *out.value().event;
        // detection latency: ticks from the first injected deviation that the
        // window covers (fallback: the window start) to the checkpoint
        Tick detected_from = ws;
        for (const auto& o : overrides_) {
            bool relevant = std::find(ev.failed_metrics.begin(), ev.failed_metrics.end(),
                                      o.metric) != ev.failed_metrics.end();
            if (!relevant || o.to <= ws || o.from >= t) continue;
            Tick first = o.from > ws ? o.from : ws;
            if (detected_from == ws || first < detected_from) detected_from = first;
        }
        json failed = json::array();
        for (const auto& m : ev.failed_metrics) failed.push_back(sla::to_string(m));
        double penalty =
            out.value().compliance ? out.value().compliance->accrued_penalty : 0.0;
        emit(t, "monitoring", "violation",
             {{"sla_id", id}, {"severity", monitoring::to_string(ev.severity)},
              {"failed", failed}, {"latency", static_cast<double>(t - detected_from)},
              {"penalty", penalty}, {"report", ev.report_ref}});
        if (ev.severity == monitoring::Severity::breach && !sc_.topology.paths.empty()) {
            double demand = 0;
            if (const sla::Slo* tp = rec->sla.find(sla::Metric::throughput_mbps))
                demand = tp->target;
            auto act = monitor_.corrective_action(ev, sc_.topology, demand, t);
            if (act)
                emit(t, "monitoring", "corrective",
                     {{"sla_id", id}, {"action", monitoring::to_string(act.value().action)},
                      {"path", act.value().new_path}});
        }
    }
    return ok_status();
}

void Engine::run_oracle(Tick t) {
    if (!oracle_) return;
    for (const auto& fid : sc_.oracle_feeds) {
        double v = sc_.oracle_base;
        for (const auto& d : feed_dev_)
            if (d.feed == fid && d.from <= t && t < d.to) v += d.delta;
        if (monitoring::OracleFeed* f = oracle_->feed(fid)) f->readings[t] = v;
    }
    auto agg = oracle_->aggregate(t);
    if (!agg) {
        emit(t, "oracle", "aggregate-failed", {{"error", to_string(agg.code())}});
        return;
    }
    json flagged = json::array();
    for (const auto& f : agg.value().flagged) flagged.push_back(f);
    json quarantined = json::array();
    for (const auto& f : agg.value().quarantined_now) quarantined.push_back(f);
    emit(t, "oracle", "aggregate",
         {{"value", agg.value().value}, {"flagged", flagged}, {"quarantined", quarantined}});
}

void Engine::run_relay(Tick t) {
    if (!relay_) return;
    relay_->tick(t);
    bool terminal_change = false;
    for (const interop::RelayTransfer* x : relay_->transfers()) {
        auto it = relay_phase_.find(x->transfer_id);
        interop::Phase last = it == relay_phase_.end() ? interop::Phase::proposed : it->second;
        if (x->phase == last) continue;
        relay_phase_[x->transfer_id] = x->phase;
        if (x->phase == interop::Phase::committed_both) {
            emit(t, "interop", "transfer-committed",
                 {{"transfer", x->transfer_id}, {"origin_hash", x->record_hash}});
            terminal_change = true;
        } else if (x->phase == interop::Phase::aborted) {
            emit(t, "interop", "transfer-aborted", {{"transfer", x->transfer_id}});
            terminal_change = true;
        } else {
            emit(t, "interop", "transfer-phase",
                 {{"transfer", x->transfer_id}, {"phase", interop::to_string(x->phase)}});
        }
    }
    if (terminal_change) {
        auto st = relay_->sync_check(t);
        if (st)
            emit(t, "interop", "sync-status",
                 {{"divergence", st.value().divergence}, {"alert", st.value().alert}});
    }
}

Status Engine::consensus_sweep(Tick t) {
    auto sweep = [this, t](ledger::Ledger& l) {
        for (const auto& ch : l.channel_ids()) {
            if (!l.has_pending(ch)) continue;
            std::size_t pending = l.pending_count(ch);
            auto r = l.run_consensus_round(ch, t);
            if (!r) {
                emit(t, "ledger", "consensus",
                     {{"ledger", l.id()}, {"channel", ch}, {"committed", 0},
                      {"rejected", pending}, {"error", to_string(r.code())}});
                continue;
            }
            emit(t, "ledger", "consensus",
                 {{"ledger", l.id()}, {"channel", ch},
                  {"committed", r.value().committed.size()},
                  {"rejected", r.value().rejected.size()},
                  {"height", r.value().block_height ? *r.value().block_height : 0}});
        }
    };
    sweep(ledger_);
    if (secondary_) sweep(*secondary_);
    return ok_status();
}

Status Engine::invariant_sweep(Tick t) {
    auto check = [this, t](const ledger::Ledger& l) -> Status {
        for (const auto& ch : l.channel_ids()) {
            auto verdict = l.verify_chain(ch);
            if (!verdict.intact)
                return {Err::InvariantViolation,
                        "chain-integrity on " + l.id() + "/" + ch + " at height " +
                            std::to_string(verdict.bad_height ? *verdict.bad_height : 0) +
                            " (tick " + std::to_string(t) + ")"};
            std::string key = l.id() + "/" + ch;
            std::uint64_t h = l.chain_height(ch);
            std::string tip = l.tip_hash(ch);
            auto it = tips_.find(key);
            if (it != tips_.end()) {
                if (h < it->second.first ||
                    (h == it->second.first && tip != it->second.second))
                    return {Err::InvariantViolation, "append-only on " + key};
            }
            tips_[key] = {h, tip};
        }
        return ok_status();
    };
    auto s = check(ledger_);
    if (!s) return s;
    if (secondary_) return check(*secondary_);
    return ok_status();
}

void Engine::write_outputs(const std::string& out_dir, const RunResult& result) {
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/chains");
    fs::create_directories(out_dir + "/reports");

    (void)write_file(out_dir + "/events.log", result.log_text);
    (void)write_file(out_dir + "/metrics.json", result.metrics.to_json().dump(2) + "\n");

    auto dump_chains = [&](const ledger::Ledger& l) {
        for (const auto& ch : l.channel_ids()) {
            auto text = l.export_chain(ch);
            if (text)
                (void)write_file(out_dir + "/chains/" + l.id() + "-" + ch + ".chain",
                                 text.value());
        }
    };
    dump_chains(ledger_);
    if (secondary_) dump_chains(*secondary_);

    for (const auto& id : reports_.ids()) {
        auto body = reports_.find(id);
        if (body) (void)write_file(out_dir + "/reports/" + id + ".json", body->dump(2) + "\n");
    }
}

Result<RunResult> Engine::run(const std::string& out_dir, std::optional<Tick> until) {
    auto s = setup();
    if (!s) return s.error();

    Tick horizon = sc_.duration;
    if (until && *until < horizon) horizon = *until;

    for (Tick t = 0; t < horizon; ++t) {
        for (const auto& f : sc_.faults)
            if (f.tick == t) {
                auto r = apply_fault(f, t);
                if (!r) return r.error();
            }
        for (const auto& i : sc_.intents)
            if (i.tick == t) {
                auto r = start_intent(i, t);
                if (!r) return r.error();
            }

        generate_samples(t);
        monitor_.note_tick();
        (void)monitor_.flush(t);

        auto cp = run_checkpoints(t);
        if (!cp) return cp.error();

        auto fired = runtime_.tick(t);
        if (!fired.empty()) emit(t, "contracts", "timers-fired", {{"count", fired.size()}});

        for (const auto& ended : orchestrator_.tick(t)) {
            auto rep = orchestrator_.final_report(ended, t);
            if (rep)
                emit(t, "lifecycle", "final-report",
                     {{"sla_id", ended}, {"penalty", rep.value().penalty_accrued},
                      {"violations", rep.value().violation_count},
                      {"early", rep.value().early_termination},
                      {"digest", rep.value().report_digest}});
        }

        run_oracle(t);
        run_relay(t);

        auto cs = consensus_sweep(t);
        if (!cs) return cs.error();
        auto inv = invariant_sweep(t);
        if (!inv) return inv.error();
    }

    if (relay_) {
        auto st = relay_->sync_check(horizon);
        if (st)
            emit(horizon - 1, "interop", "sync-final",
                 {{"divergence", st.value().divergence}, {"alert", st.value().alert}});
    }

    RunResult result;
    result.metrics = RunMetrics::from_events(events_);
    result.events = events_;
    std::string log;
    log += json{{"kind", "header"}, {"schema", kLogSchema}, {"scenario", sc_.name},
                {"seed", sc_.seed}}
               .dump() +
           "\n";
    for (const auto& e : events_) log += e.dump() + "\n";
    log += json{{"kind", "footer"}, {"events", events_.size()},
                {"metrics", result.metrics.to_json()}}
               .dump() +
           "\n";
    result.log_text = log;

    if (!out_dir.empty()) write_outputs(out_dir, result);
    return result;
}

}  // namespace pdl::harness
