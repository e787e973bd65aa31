// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Scenario directory comes from argv[1].

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pdl/harness.hpp"
#include "pdl/hash.hpp"

using namespace pdl;
using nlohmann::json;

namespace {

const char* kScenarioNames[] = {
    "football-slice",  "surgery-breach", "churn-consensus", "collusion-blacklist",
    "oracle-attack",   "npn-plmn-handover", "relay-interop",
};

struct ScenarioRun {
    harness::Scenario sc;
    harness::RunResult first;
    harness::RunResult second;
};

struct Gate {
    bool pass = true;
    std::string note;

    void fail(const std::string& why) {
        pass = false;
        if (note.empty()) note = why;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ledger::Ledger small_net(int validators) {
    ledger::Ledger l;
    (void)l.node_join("gov", ledger::Role::governance);
    for (int i = 1; i <= validators; ++i) (void)l.node_join("v" + std::to_string(i));
    return l;
}

// --------------------------------------------------------------- criterion 1

Gate immutability() {
    Gate g;
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> len(2, 20);
    int located = 0;
    for (int trial = 0; trial < 100; ++trial) {
        ledger::Ledger l = small_net(4);
        int blocks = len(rng);
        for (int h = 1; h <= blocks; ++h) {
            auto tx = ledger::Transaction::make(json{{"trial", trial}, {"h", h}}, "v1",
                                                ledger::Ledger::kDefaultChannel, h);
            if (!l.submit_transaction(std::move(tx)).ok()) break;
            if (!l.run_consensus_round(ledger::Ledger::kDefaultChannel, h).ok()) break;
        }
        std::uniform_int_distribution<std::uint64_t> pick(
            1, l.chain_height(ledger::Ledger::kDefaultChannel));
        std::uint64_t target = pick(rng);
        if (!l.inject_tamper(ledger::Ledger::kDefaultChannel, target).ok()) continue;
        auto verdict = l.verify_chain(ledger::Ledger::kDefaultChannel);
        if (!verdict.intact && verdict.bad_height && *verdict.bad_height == target) ++located;
    }
    double dt = seconds_since(t0);
    if (located != 100) g.fail("located " + std::to_string(located) + "/100 tamper heights");
    if (dt >= 10.0) g.fail("took " + std::to_string(dt) + "s, budget 10s");
    if (g.pass)
        g.note = "100/100 tamper injections located in " + std::to_string(dt).substr(0, 5) + "s";
    return g;
}

// --------------------------------------------------------------- criterion 2

Gate quorum_equivalence() {
    Gate g;
    int cases = 0, mismatches = 0;
    for (int n = 0; n <= 9; ++n) {
        for (int k = 0; k <= n; ++k) {
            ++cases;
            ledger::Ledger l = small_net(n);
            for (int i = k + 1; i <= n; ++i)
                l.set_vote_policy("v" + std::to_string(i),
                                  [](const ledger::Transaction&) { return false; });
            auto tx = ledger::Transaction::make(json{{"n", n}, {"k", k}},
                                                n > 0 ? "v1" : "gov",
                                                ledger::Ledger::kDefaultChannel, 1);
            if (!l.submit_transaction(std::move(tx)).ok()) {
                ++mismatches;
                continue;
            }
            auto round = l.run_consensus_round(ledger::Ledger::kDefaultChannel, 1);
            bool committed = round.ok() && round.value().committed.size() == 1;
            bool expected = n > 0 && k >= (2 * n + 2) / 3;
            if (committed != expected) ++mismatches;
        }
    }
    if (mismatches != 0 || cases != 55)
        g.fail(std::to_string(mismatches) + " mismatches over " + std::to_string(cases) +
               " cases");
    else
        g.note = "55 brute-force cases, 0 mismatches";
    return g;
}

// --------------------------------------------------------------- criterion 3

json revocation_descriptor(Tick fire_at, int nonce) {
    return json{{"schema", 1},
                {"kind", "ac-sc"},
                {"owner", "alice"},
                {"state", {{"access", "granted"}, {"nonce", nonce}}},
                {"functions",
                 {{"use", {{"requires", {{"access", "granted"}}}}},
                  {"revoke", {{"sets", {{"access", "revoked"}}}}}}},
                {"acl", {{"use", json::array({"bob"})}, {"revoke", json::array({"gov"})}}},
                {"timers", json::array({json{{"timer_id", "revocation"},
                                             {"fire_at", fire_at},
                                             {"action", "revoke"}}})}};
}

Gate timer_semantics() {
    Gate g;
    ledger::Ledger l = small_net(3);
    (void)l.node_join("alice");
    (void)l.node_join("bob");
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<Tick> grant_at(0, 1000), duration(1, 500);
    int exact = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        Tick grant = grant_at(rng);
        Tick fire = grant + duration(rng);
        contracts::Runtime rt(l);
        auto id = rt.install_contract(revocation_descriptor(fire, trial),
                                      ledger::Ledger::kDefaultChannel, "alice", grant);
        if (!id.ok() || !rt.activate(id.value(), "alice", grant).ok()) continue;
        if (!rt.tick(fire - 1).empty()) continue;  // must not fire early
        if (!rt.invoke(id.value(), "use", "bob", json::object(), fire - 1).ok()) continue;
        auto fired = rt.tick(fire);
        if (fired.size() != 1 || fired[0].function != "revoke") continue;
        auto late = rt.invoke(id.value(), "use", "bob", json::object(), fire + 1);
        if (late.ok() || late.code() != Err::TransitionFailed) continue;
        ++exact;
    }
    if (exact != trials)
        g.fail(std::to_string(exact) + "/" + std::to_string(trials) + " pairs exact");
    else
        g.note = "1000/1000 (grant, duration) pairs fired and revoked on the exact tick";
    return g;
}

// --------------------------------------------------------------- criterion 4

Gate termination_contract(const std::map<std::string, ScenarioRun>& runs) {
    Gate g;
    int slas_checked = 0;
    for (const auto& [name, run] : runs) {
        const harness::Scenario& sc = run.sc;

        ledger::Ledger l(sc.ledger.cfg, sc.ledger.id);
        for (const auto& n : sc.ledger.nodes) (void)l.node_join(n.id, n.role);
        for (const auto& ch : sc.ledger.channels)
            (void)l.create_channel(ch.creator, ch.members, ch.id);
        contracts::Runtime runtime(l);
        lifecycle::ResourceRegistry registry;
        for (const auto& [rid, cap] : sc.resources) registry.declare(rid, cap);
        reports::ReportStore reports;
        lifecycle::Orchestrator orch(l, runtime, registry, reports, sc.main_channel,
                                     sc.governance);

        for (const auto& spec : sc.intents) {
            Tick t = spec.tick;
            auto ast = intent::parse_intent(spec.text, sc.presets);
            if (!ast.ok()) continue;
            intent::NegotiationSession session(ast.value(), sc.catalogue, sc.presets,
                                               spec.customer);
            if (!session.open_error().ok()) continue;
            auto out = session.refine({true, {}});
            if (!out.ok() || !out.value().agreed) continue;
            intent::AgreedTerms terms = *out.value().agreed;

            sla::Sla s;
            s.sla_id = "sla-" + terms.digest().substr(0, 12);
            s.provider = terms.provider;
            s.customer = terms.customer;
            s.slos = terms.slos;
            s.start = terms.window_start > t ? terms.window_start : t + 1;
            s.end = s.start + terms.window_duration;
            s.checkpoint_period = spec.checkpoint_period;
            s.penalty = spec.penalty;

            auto it_sc = intent::record_agreement(runtime, terms, sc.main_channel,
                                                  spec.customer, t);
            if (!it_sc.ok()) {
                g.fail(name + ": agreement not recorded");
                continue;
            }
            if (!orch.register_agreement(s, it_sc.value()).ok() ||
                !orch.orchestrate(s.sla_id, t).ok() ||
                !orch.grant_access(spec.customer, s.sla_id, t).ok() ||
                !orch.initialise(s.sla_id, t).ok()) {
                g.fail(name + ": lifecycle did not reach active for " + s.sla_id);
                continue;
            }
            Tick end = s.start + 1;
            if (!orch.terminate(s.sla_id, sc.governance, end).ok()) {
                g.fail(name + ": governance termination refused for " + s.sla_id);
                continue;
            }
            if (l.has_pending(sc.main_channel))
                (void)l.run_consensus_round(sc.main_channel, end + 1);

            const lifecycle::SlaRecord* rec = orch.find(s.sla_id);
            bool ok = rec != nullptr;
            for (const std::string& cid :
                 {rec->it_sc, rec->ac_sc, rec->so_sc, rec->sr_sc}) {
                const contracts::Contract* c = runtime.find(cid);
                bool invocation_fails =
                    !runtime.invoke(cid, "probe", sc.governance, json::object(), end + 2).ok();
                bool state_cleared = c != nullptr && c->state_vars.empty();
                bool record_readable =
                    !l.committed_matching(sc.main_channel,
                                          [&](const ledger::Transaction& tx) {
                                              return tx.payload.value("type", "") ==
                                                         "contract-install" &&
                                                     tx.payload.value("contract_id", "") == cid;
                                          })
                         .empty() &&
                    l.verify_chain(sc.main_channel).intact;
                ok = ok && invocation_fails && state_cleared && record_readable;
            }
            // one combined assertion per SLA
            if (!ok) g.fail(name + ": post-termination contract check failed for " + s.sla_id);
            ++slas_checked;
        }
    }
    if (slas_checked == 0) g.fail("no SLA reached termination in any scenario");
    if (g.pass)
        g.note = std::to_string(slas_checked) +
                 " SLAs: all four subcontract kinds dead, state cleared, history readable";
    return g;
}

// --------------------------------------------------------------- criterion 5

sla::Sla link_sla(const std::string& id, const std::string& provider,
                  const std::string& customer, std::vector<sla::Slo> slos) {
    sla::Sla s;
    s.sla_id = id;
    s.provider = provider;
    s.customer = customer;
    s.slos = std::move(slos);
    s.start = 0;
    s.end = 100;
    s.checkpoint_period = 10;
    s.penalty = {5, 100};
    return s;
}

Gate composition_algebra() {
    Gate g;
    auto slo = [](sla::Metric m, double t) { return sla::Slo::make(m, t).value(); };

    sla::Sla a = link_sla("a", "mid", "alice", {slo(sla::Metric::availability_fraction, 0.99)});
    sla::Sla b = link_sla("b", "far", "mid", {slo(sla::Metric::availability_fraction, 0.98)});
    auto chain = sla::compose_serial({a, b});
    if (!chain.ok()) return (g.fail("serial composition failed"), g);
    double composed = chain.value().find(sla::Metric::availability_fraction)->target;

    std::mt19937_64 rng(505);
    std::bernoulli_distribution up_a(0.99), up_b(0.98);
    long long both = 0;
    const long long trials = 1000000;
    for (long long i = 0; i < trials; ++i)
        if (up_a(rng) && up_b(rng)) ++both;
    double simulated = static_cast<double>(both) / static_cast<double>(trials);
    if (std::abs(simulated - composed) >= 0.001)
        g.fail("Monte-Carlo availability off by " + std::to_string(simulated - composed));

    std::uniform_real_distribution<double> lat(1, 50), avail(0.9, 0.9999), loss(0, 0.05),
        tp(10, 1000);
    for (int trial = 0; trial < 1000 && g.pass; ++trial) {
        auto link = [&](const std::string& id, const std::string& provider,
                        const std::string& customer) {
            return link_sla(id, provider, customer,
                            {slo(sla::Metric::latency_ms, lat(rng)),
                             slo(sla::Metric::availability_fraction, avail(rng)),
                             slo(sla::Metric::throughput_mbps, tp(rng)),
                             slo(sla::Metric::packet_loss_fraction, loss(rng))});
        };
        sla::Sla x = link("x", "p1", "c0"), y = link("y", "p2", "p1"), z = link("z", "p3", "p2");
        auto left = sla::compose_serial({sla::compose_serial({x, y}).value(), z});
        auto right = sla::compose_serial({x, sla::compose_serial({y, z}).value()});
        if (!left.ok() || !right.ok()) {
            g.fail("associativity chain refused to compose");
            break;
        }
        for (const auto& s : left.value().slos)
            if (std::abs(s.target - right.value().find(s.metric)->target) >= 1e-9)
                g.fail("associativity drift beyond 1e-9");
    }

    sla::Sla npn = link_sla("npn", "p", "c", {slo(sla::Metric::latency_ms, 10.0),
                                              slo(sla::Metric::throughput_mbps, 750.0)});
    sla::Sla plmn = link_sla("plmn", "p", "c", {slo(sla::Metric::latency_ms, 50.0),
                                                slo(sla::Metric::throughput_mbps, 100.0)});
    auto w1 = sla::compose_weighted(npn, plmn, 1.0);
    if (!w1.ok())
        g.fail("weighted composition failed");
    else
        for (const auto& s : npn.slos)
            if (w1.value().find(s.metric)->target != s.target)
                g.fail("weight 1 did not reproduce the first SLA bit-exactly");

    if (g.pass)
        g.note = "MC availability within 0.001, associativity over 1000 chains, weight-1 exact";
    return g;
}

// --------------------------------------------------------------- criterion 6

Gate detection_latency(const std::map<std::string, ScenarioRun>& runs) {
    Gate g;
    const ScenarioRun& run = runs.at("surgery-breach");
    Tick injection = -1;
    for (const auto& f : run.sc.faults)
        if (f.kind == "metric-spike") injection = f.tick;
    if (injection < 0 || run.sc.intents.empty()) return (g.fail("scenario shape changed"), g);
    Tick period = run.sc.intents[0].checkpoint_period;
    const sla::PenaltyRule& rule = run.sc.intents[0].penalty;

    const json* breach = nullptr;
    for (const auto& e : run.first.events)
        if (e.value("kind", "") == "violation" && e.value("severity", "") == "breach") {
            breach = &e;
            break;
        }
    if (!breach) return (g.fail("no breach violation in surgery-breach"), g);

    Tick detected = breach->at("tick").get<Tick>();
    if (detected > injection + period)
        g.fail("checkpoint tick " + std::to_string(detected) + " > injection+period " +
               std::to_string(injection + period));
    double expected = std::min(rule.cap, rule.units_per_breach *
                                             static_cast<double>(breach->at("failed").size()));
    if (breach->at("penalty").get<double>() != expected)
        g.fail("penalty " + std::to_string(breach->at("penalty").get<double>()) +
               " != hand-computed " + std::to_string(expected));
    if (g.pass)
        g.note = "breach at tick " + std::to_string(detected) + " <= " +
                 std::to_string(injection + period) + ", penalty matches min(cap, b*units)";
    return g;
}

// --------------------------------------------------------------- criterion 7

Gate collusion(const std::map<std::string, ScenarioRun>& runs) {
    Gate g;
    const ScenarioRun& run = runs.at("collusion-blacklist");
    std::set<std::string> scripted;
    for (const auto& f : run.sc.faults)
        if (f.kind == "collude")
            for (const auto& n : f.params.at("nodes")) scripted.insert(n.get<std::string>());

    if (run.first.metrics.rejected_tx != 0)
        g.fail(std::to_string(run.first.metrics.rejected_tx) + " honest txs rejected");

    std::set<std::string> detected;
    for (const auto& e : run.first.events)
        if (e.value("kind", "") == "collusion-detected")
            for (const auto& n : e.at("nodes")) detected.insert(n.get<std::string>());
    if (detected != scripted) g.fail("flagged set differs from the scripted colluders");
    if (g.pass)
        g.note = "0 rejected honest txs, flagged exactly " +
                 std::to_string(scripted.size()) + " scripted colluders";
    return g;
}

// --------------------------------------------------------------- criterion 8

Gate oracle_robustness() {
    Gate g;
    ledger::Ledger l;
    (void)l.node_join("gov", ledger::Role::governance);
    std::mt19937_64 rng(808);
    std::uniform_int_distribution<int> nsize(3, 9);
    std::uniform_real_distribution<double> honest_v(0, 100), adversarial(-1000, 1000);
    const int trials = 10000;
    int exact = 0;
    for (int trial = 0; trial < trials; ++trial) {
        int n = nsize(rng);
        int max_f = (n + 1) / 2 - 1;  // f < ceil(n/2)
        std::uniform_int_distribution<int> fsize(0, max_f);
        int f = fsize(rng);
        double v = honest_v(rng);
        monitoring::OracleService oracle(l, "gov");
        for (int i = 0; i < n; ++i) {
            double reading = i < f ? adversarial(rng) : v;
            oracle.add_feed({"f" + std::to_string(i), "sensor", {{0, reading}},
                             monitoring::Trust::normal, 0});
        }
        auto agg = oracle.aggregate(0);
        if (agg.ok() && agg.value().value == v) ++exact;
    }
    if (exact != trials)
        g.fail(std::to_string(exact) + "/" + std::to_string(trials) +
               " aggregates matched the honest median");
    else
        g.note = "10000/10000 adversarial trials returned the honest median";
    return g;
}

// --------------------------------------------------------------- criterion 9

interop::TranslationTable relay_table() {
    interop::TranslationTable t;
    t.mappings[{1, 2}] = {{"lat", "latency_ms"}};
    t.required[2] = {"latency_ms"};
    return t;
}

struct RelayNet {
    ledger::Ledger a{ledger::LedgerConfig{}, "ledger-a"};
    ledger::Ledger b{ledger::LedgerConfig{}, "ledger-b"};
    std::string src_tx;

    RelayNet() {
        for (ledger::Ledger* l : {&a, &b}) {
            (void)l->node_join("notary", ledger::Role::governance);
            for (int i = 1; i <= 3; ++i) (void)l->node_join("v" + std::to_string(i));
        }
        auto tx = ledger::Transaction::make(json{{"lat", 12}}, "v1",
                                            ledger::Ledger::kDefaultChannel, 1);
        src_tx = tx.tx_id;
        (void)a.submit_transaction(std::move(tx));
        (void)a.run_consensus_round(ledger::Ledger::kDefaultChannel, 1);
    }

    void gate(ledger::Ledger& l, const std::string& type, const bool* blocked) {
        for (int i = 1; i <= 3; ++i)
            l.set_vote_policy("v" + std::to_string(i),
                              [type, blocked](const ledger::Transaction& tx) {
                                  return !(*blocked && tx.payload.value("type", "") == type);
                              });
    }
};

bool terminal_is_atomic(const interop::RelayTransfer& t) {
    if (t.phase == interop::Phase::committed_both) return t.dst_committed && t.src_confirmed;
    if (t.phase == interop::Phase::aborted)
        return (!t.src_locked || t.src_unlocked) && (!t.dst_locked || t.dst_unlocked);
    return false;  // not terminal at all
}

Gate interop_atomicity() {
    Gate g;
    struct Fault {
        char side;  // 'a', 'b', or '-' for none
        const char* type;
    };
    const Fault faults[] = {{'-', ""},
                            {'a', "relay-lock"},
                            {'b', "relay-lock"},
                            {'b', "relay-record"},
                            {'a', "relay-confirm"}};
    for (const Fault& f : faults) {
        RelayNet net;
        bool blocked = true;
        if (f.side == 'a') net.gate(net.a, f.type, &blocked);
        if (f.side == 'b') net.gate(net.b, f.type, &blocked);
        interop::RelayCoordinator relay(net.a, net.b, "notary", relay_table());
        auto id = relay.start_transfer("ledger-a", ledger::Ledger::kDefaultChannel, net.src_tx,
                                       ledger::Ledger::kDefaultChannel, 1, 2, 10, 5);
        if (!id.ok()) {
            g.fail("transfer refused to start");
            continue;
        }
        for (Tick t = 6; t <= 30 && !relay.all_terminal(); ++t) relay.tick(t);
        const interop::RelayTransfer* x = relay.find(id.value());
        if (!relay.all_terminal() || !terminal_is_atomic(*x))
            g.fail(std::string("one-sided terminal state with fault ") + f.side + ":" + f.type);
        bool should_commit = f.side == '-';
        if ((x->phase == interop::Phase::committed_both) != should_commit)
            g.fail(std::string("unexpected outcome with fault ") + f.side + ":" + f.type);
    }

    // alert fires iff the commit-tick divergence exceeds max_divergence (10)
    for (Tick gap : {Tick{10}, Tick{11}}) {
        RelayNet net;
        bool blocked = true;
        net.gate(net.a, "relay-confirm", &blocked);
        interop::RelayCoordinator relay(net.a, net.b, "notary", relay_table());
        auto id = relay.start_transfer("ledger-a", ledger::Ledger::kDefaultChannel, net.src_tx,
                                       ledger::Ledger::kDefaultChannel, 1, 2, 100, 5);
        if (!id.ok()) {
            g.fail("divergence transfer refused to start");
            continue;
        }
        blocked = false;
        relay.tick(5 + gap);
        auto st = relay.sync_check(5 + gap);
        if (!st.ok() || st.value().divergence != gap || st.value().alert != (gap > 10))
            g.fail("alert rule wrong at divergence " + std::to_string(gap));
    }
    if (g.pass) g.note = "5 fault points all atomic; alert iff divergence > 10";
    return g;
}

// -------------------------------------------------------------- criterion 10

Gate determinism(const std::map<std::string, ScenarioRun>& runs, double elapsed) {
    Gate g;
    for (const auto& [name, run] : runs) {
        if (run.first.log_text != run.second.log_text)
            g.fail(name + ": two runs differ byte-wise");
        auto replayed = harness::replay(run.first.log_text);
        if (!replayed.ok() || !(replayed.value() == run.first.metrics))
            g.fail(name + ": replay does not reconcile with run metrics");
    }
    if (elapsed >= 60.0) g.fail("suite took " + std::to_string(elapsed) + "s, budget 60s");
    if (g.pass)
        g.note = "7 scenarios byte-identical twice, replay reconciles, " +
                 std::to_string(elapsed).substr(0, 5) + "s";
    return g;
}

// -------------------------------------------------------------- criterion 11

Gate parser_fuzz() {
    Gate g;
    intent::PresetTable presets = intent::PresetTable::defaults();
    const char* corpus[] = {
        "slice FOR 5000 users WITH low-latency AT stadium FROM 18:00 LASTING 2h",
        "surgery FOR 10 streams WITH latency_ms<=10 WITH high-availability FROM 10 LASTING 340",
        "backup WITH best-effort",
        "feed FOR 3 cameras AT pitch FROM 0 LASTING 90",
        "link WITH reliable WITH throughput_mbps>=250 FROM 12:30 LASTING 45m",
    };
    const char* vocab[] = {"slice", "FOR",  "WITH", "AT",       "FROM",       "LASTING",
                           "users", "2h",   "45m",  "18:00",    "low-latency", "best-effort",
                           "<=",    ">=",   "5000", "latency_ms", "stadium",  "0",
                           "-1",    "9e99", "\xff", "(",         "\"",         ""};

    std::mt19937_64 rng(111);
    std::uniform_int_distribution<int> mode(0, 2), toks(0, 12), word(0, 23), chr(0, 255),
        blen(0, 80), pick(0, 4);
    int crashes = 0;
    for (int i = 0; i < 100000; ++i) {
        std::string input;
        int m = mode(rng);
        if (m == 0) {
            int n = blen(rng);
            for (int c = 0; c < n; ++c) input.push_back(static_cast<char>(chr(rng)));
        } else if (m == 1) {
            int n = toks(rng);
            for (int t = 0; t < n; ++t) {
                if (t) input.push_back(' ');
                input += vocab[word(rng)];
            }
        } else {
            input = corpus[pick(rng)];
            if (!input.empty()) {
                std::uniform_int_distribution<std::size_t> at(0, input.size() - 1);
                input[at(rng)] = static_cast<char>(chr(rng));
            }
        }
        try {
            (void)intent::parse_intent(input, presets);
        } catch (...) {
            ++crashes;
        }
    }
    if (crashes != 0) g.fail(std::to_string(crashes) + " inputs escaped as exceptions");

    for (const char* text : corpus) {
        auto first = intent::parse_intent(text, presets);
        if (!first.ok()) {
            g.fail("corpus input stopped parsing");
            continue;
        }
        auto second = intent::parse_intent(first.value().print(), presets);
        if (!second.ok() || !(first.value() == second.value()))
            g.fail("corpus round-trip produced a different tree");
    }
    if (g.pass) g.note = "100000 fuzz inputs crash-free, corpus round-trips identically";
    return g;
}

}  // namespace

int main(int argc, char** argv) {
    std::string scenario_dir = argc > 1 ? argv[1] : PDL_SCENARIO_DIR;

    std::map<std::string, ScenarioRun> runs;
    auto t0 = std::chrono::steady_clock::now();
    for (const char* name : kScenarioNames) {
        auto sc = harness::Scenario::load(scenario_dir + "/" + std::string(name) + ".json");
        if (!sc.ok()) {
            std::cout << "FAIL  0 setup: cannot load " << name << ": " << sc.error().message
                      << "\n";
            return 1;
        }
        ScenarioRun run;
        run.sc = sc.value();
        auto first = harness::Engine(run.sc).run("");
        auto second = harness::Engine(run.sc).run("");
        if (!first.ok() || !second.ok()) {
            std::cout << "FAIL  0 setup: " << name << " did not run\n";
            return 1;
        }
        run.first = std::move(first).take();
        run.second = std::move(second).take();
        runs.emplace(name, std::move(run));
    }
    double scenario_elapsed = seconds_since(t0);

    struct Line {
        int num;
        const char* title;
        Gate gate;
    };
    std::vector<Line> lines;
    lines.push_back({1, "immutability", immutability()});
    lines.push_back({2, "quorum-equivalence", quorum_equivalence()});
    lines.push_back({3, "timer-semantics", timer_semantics()});
    lines.push_back({4, "termination-contract", termination_contract(runs)});
    lines.push_back({5, "composition-algebra", composition_algebra()});
    lines.push_back({6, "detection-latency", detection_latency(runs)});
    lines.push_back({7, "collusion", collusion(runs)});
    lines.push_back({8, "oracle-robustness", oracle_robustness()});
    lines.push_back({9, "interop-atomicity", interop_atomicity()});
    lines.push_back({10, "determinism", determinism(runs, scenario_elapsed)});
    lines.push_back({11, "intent-parser", parser_fuzz()});

    bool all = true;
    for (const auto& line : lines) {
        all = all && line.gate.pass;
        std::cout << (line.gate.pass ? "PASS" : "FAIL") << "  " << line.num << " "
                  << line.title << ": " << line.gate.note << "\n";
    }
    return all ? 0 : 1;
}
