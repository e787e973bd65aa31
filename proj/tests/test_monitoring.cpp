#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pdl/monitoring.hpp"

using namespace pdl;
using namespace pdl::monitoring;
using nlohmann::json;

namespace {

sla::Slo slo(sla::Metric m, double target) { return sla::Slo::make(m, target).value(); }

struct Fixture {
    ledger::Ledger ledger;
    contracts::Runtime runtime;
    lifecycle::ResourceRegistry registry;
    reports::ReportStore reports;
    lifecycle::Orchestrator orch;
    Monitor monitor;

    Fixture()
        : ledger(),
          runtime(ledger),
          orch(ledger, runtime, registry, reports, ledger::Ledger::kDefaultChannel, "gov"),
          monitor(ledger, runtime, orch, reports, MonitorConfig{},
                  ledger::Ledger::kDefaultChannel, "gov") {
        REQUIRE(ledger.node_join("gov", ledger::Role::governance).ok());
        for (int i = 1; i <= 3; ++i)
            REQUIRE(ledger.node_join("v" + std::to_string(i)).ok());
        REQUIRE(ledger.node_join("op-a").ok());
        REQUIRE(ledger.node_join("alice", ledger::Role::observer).ok());
        registry.declare("R1", 200);
        REQUIRE(monitor.register_resource("R1").ok());
    }

    // carries one SLA to the active state so SR-SC recording works
    std::string provision(double latency_target = 20) {
        sla::Sla s;
        s.sla_id = "sla-1";
        s.provider = "op-a";
        s.customer = "alice";
        s.slos = {slo(sla::Metric::latency_ms, latency_target)};
        s.start = 0;
        s.end = 100;
        s.checkpoint_period = 10;
        s.penalty = {5, 50};

        json d{{"schema", 1},
               {"kind", "it-sc"},
               {"owner", "op-a"},
               {"functions", {{"get_terms", json::object()}}}};
        auto it_sc = runtime.install_contract(d, ledger::Ledger::kDefaultChannel, "op-a", 0);
        REQUIRE(it_sc.ok());
        REQUIRE(runtime.activate(it_sc.value(), "op-a", 0).ok());
        REQUIRE(orch.register_agreement(s, it_sc.value()).ok());
        REQUIRE(orch.orchestrate("sla-1", 0).ok());
        REQUIRE(orch.grant_access("alice", "sla-1", 0).ok());
        REQUIRE(orch.initialise("sla-1", 0).ok());
        return "sla-1";
    }

    void feed(const std::string& sla_id, Tick from, Tick to, double latency) {
        for (Tick t = from; t < to; ++t)
            REQUIRE(monitor.record_usage(sla_id,
                                         {"R1", t, sla::Metric::latency_ms, latency}).ok());
        REQUIRE(monitor.flush(to).ok());
    }
};

}  // namespace

TEST_CASE("samples only reach the ledger while the pdlf is active") {
    Fixture f;
    auto sla_id = f.provision();

    // inactive: dropped and counted
    auto dropped = f.monitor.record_usage(sla_id, {"R1", 1, sla::Metric::latency_ms, 10});
    REQUIRE_FALSE(dropped.ok());
    CHECK(dropped.code() == Err::PdlfInactive);
    CHECK(f.monitor.pdlf("R1")->dropped == 1);

    REQUIRE(f.monitor.activate_pdlf("R1").ok());
    for (Tick t = 1; t <= 5; ++t)
        REQUIRE(f.monitor.record_usage(sla_id, {"R1", t, sla::Metric::latency_ms, 10}).ok());
    auto flushed = f.monitor.flush(6);
    REQUIRE(flushed.ok());
    CHECK(flushed.value() == 5);
    CHECK(f.monitor.total_recorded() == 5);
    CHECK(f.monitor.total_dropped() == 1);
    CHECK(f.ledger.pending_count(ledger::Ledger::kDefaultChannel) > 0);

    auto ghost = f.monitor.activate_pdlf("R9");
    REQUIRE_FALSE(ghost.ok());
    CHECK(ghost.code() == Err::UnknownResource);
}

TEST_CASE("deactivation flushes the buffer before going quiet") {
    Fixture f;
    auto sla_id = f.provision();
    REQUIRE(f.monitor.activate_pdlf("R1").ok());
    for (Tick t = 1; t <= 3; ++t)
        REQUIRE(f.monitor.record_usage(sla_id, {"R1", t, sla::Metric::latency_ms, 10}).ok());
    auto st = f.monitor.deactivate_pdlf("R1", 4);
    REQUIRE(st.ok());
    CHECK_FALSE(st.value().active);
    CHECK(st.value().recorded == 3);
    CHECK(st.value().buffer.empty());
}

TEST_CASE("oversized batches land off-chain behind one reference") {
    Fixture f;
    auto sla_id = f.provision();
    REQUIRE(f.monitor.activate_pdlf("R1").ok());
    for (int i = 0; i < 10000; ++i)
        REQUIRE(f.monitor.record_usage(sla_id, {"R1", 1, sla::Metric::latency_ms, 10}).ok());
    std::size_t pending_before = f.ledger.pending_count(ledger::Ledger::kDefaultChannel);
    REQUIRE(f.monitor.flush(2).ok());
    // one batch reference, not ten thousand transactions
    CHECK(f.ledger.pending_count(ledger::Ledger::kDefaultChannel) <= pending_before + 2);
    auto round = f.ledger.run_consensus_round(ledger::Ledger::kDefaultChannel, 2);
    REQUIRE(round.ok());
    auto batches = f.ledger.committed_matching(
        ledger::Ledger::kDefaultChannel, [](const ledger::Transaction& tx) {
            return tx.payload.value("type", "") == "usage-batch";
        });
    REQUIRE(batches.size() == 1);
    auto payload = f.runtime.load_offchain(batches[0].payload.at("ref").get<std::string>());
    REQUIRE(payload.ok());
    CHECK(batches[0].payload.at("count").get<std::size_t>() == 10000);
}

TEST_CASE("usage recording stops once the sr-sc is gone") {
    Fixture f;
    auto sla_id = f.provision();
    REQUIRE(f.monitor.activate_pdlf("R1").ok());
    REQUIRE(f.orch.terminate(sla_id, "gov", 50).ok());
    auto r = f.monitor.record_usage(sla_id, {"R1", 51, sla::Metric::latency_ms, 10});
    REQUIRE_FALSE(r.ok());
    CHECK(r.code() == Err::ContractNotActive);
}

TEST_CASE("periodic reports are emitted even for quiet periods") {
    Fixture f;
    auto quiet = f.monitor.periodic_report("R1", 10);
    CHECK(quiet.samples == 0);
    CHECK_FALSE(quiet.digest.empty());

    auto again = f.monitor.periodic_report("R1", 20);
    CHECK(again.period_end > quiet.period_end);
    CHECK(f.monitor.pdlf("R1")->last_report_tick == 20);
    // identical inputs reproduce the digest
    auto rerun = f.monitor.periodic_report("R1", 20);
    CHECK(rerun.digest == again.digest);
}

TEST_CASE("clean checkpoints stay clean and empty windows warn") {
    Fixture f;
    auto sla_id = f.provision();
    REQUIRE(f.monitor.activate_pdlf("R1").ok());
    f.feed(sla_id, 0, 10, 15.0);

    auto clean = f.monitor.checkpoint(sla_id, 0, 10);
    REQUIRE(clean.ok());
    CHECK(clean.value().clean);

    auto empty = f.monitor.checkpoint(sla_id, 40, 50);
    REQUIRE(empty.ok());
    REQUIRE(empty.value().event.has_value());
    CHECK(empty.value().event->severity == Severity::warning);
    CHECK(empty.value().event->action == Action::none);
}

TEST_CASE("a single near miss warns, a clear miss breaches") {
    Fixture f;
    auto sla_id = f.provision(20);
    REQUIRE(f.monitor.activate_pdlf("R1").ok());
    f.feed(sla_id, 0, 10, 21.0);   // 5% over, inside the warning band
    f.feed(sla_id, 10, 20, 25.0);  // 25% over

    auto warn = f.monitor.checkpoint(sla_id, 0, 10);
    REQUIRE(warn.ok());
    REQUIRE(warn.value().event.has_value());
    CHECK(warn.value().event->severity == Severity::warning);

    auto breach = f.monitor.checkpoint(sla_id, 10, 20);
    REQUIRE(breach.ok());
    REQUIRE(breach.value().event.has_value());
    CHECK(breach.value().event->severity == Severity::breach);
    CHECK_FALSE(breach.value().event->report_ref.empty());
    CHECK(f.orch.find(sla_id)->violations.size() == 1);
}

TEST_CASE("corrective action reroutes to the lowest feasible path") {
    Fixture f;
    auto sla_id = f.provision();
    ViolationEvent ev;
    ev.sla_id = sla_id;
    ev.severity = Severity::breach;

    Topology topo;
    topo.paths = {{"p0", 10, 8}, {"p2", 30, 9}, {"p1", 30, 9}};
    topo.current_path = "p0";
    auto acted = f.monitor.corrective_action(ev, topo, 25, 30);
    REQUIRE(acted.ok());
    CHECK(acted.value().action == Action::reroute);
    CHECK(acted.value().new_path == "p1");  // lowest id with enough headroom
    CHECK(topo.current_path == "p1");
}

TEST_CASE("with no alternate path the contract is interrupted") {
    Fixture f;
    auto sla_id = f.provision();
    ViolationEvent ev;
    ev.sla_id = sla_id;
    ev.severity = Severity::breach;

    Topology topo;
    topo.paths = {{"p0", 10, 8}};
    topo.current_path = "p0";
    auto acted = f.monitor.corrective_action(ev, topo, 25, 30);
    REQUIRE(acted.ok());
    CHECK(acted.value().action == Action::interrupt);
    CHECK(f.runtime.find(f.orch.find(sla_id)->master)->status ==
          contracts::ContractStatus::Interrupted);

    ev.severity = Severity::warning;
    auto refused = f.monitor.corrective_action(ev, topo, 25, 31);
    REQUIRE_FALSE(refused.ok());
}

TEST_CASE("the oracle takes the median and flags outliers") {
    ledger::Ledger l;
    REQUIRE(l.node_join("gov", ledger::Role::governance).ok());
    OracleService oracle(l, "gov");
    oracle.add_feed({"f1", "sensor", {{0, 10}, {1, 10}}, Trust::normal, 0});
    oracle.add_feed({"f2", "sensor", {{0, 11}, {1, 11}}, Trust::normal, 0});
    oracle.add_feed({"f3", "sensor", {{0, 10}, {1, 500}}, Trust::normal, 0});

    auto quiet = oracle.aggregate(0);
    REQUIRE(quiet.ok());
    CHECK(quiet.value().value == 10.0);

    auto noisy = oracle.aggregate(1);
    REQUIRE(noisy.ok());
    CHECK(noisy.value().value == 11.0);
    CHECK(noisy.value().flagged == std::vector<std::string>{"f3"});
}

TEST_CASE("three consecutive strikes quarantine a feed") {
    ledger::Ledger l;
    REQUIRE(l.node_join("gov", ledger::Role::governance).ok());
    OracleService oracle(l, "gov");
    std::map<Tick, double> honest, liar;
    for (Tick t = 0; t < 10; ++t) {
        honest[t] = 10;
        liar[t] = t == 2 ? 10 : 500;  // one clean tick resets the strikes
    }
    oracle.add_feed({"f1", "sensor", honest, Trust::normal, 0});
    oracle.add_feed({"f2", "sensor", honest, Trust::normal, 0});
    oracle.add_feed({"f3", "sensor", honest, Trust::normal, 0});
    oracle.add_feed({"f4", "sensor", liar, Trust::normal, 0});

    REQUIRE(oracle.aggregate(0).ok());
    REQUIRE(oracle.aggregate(1).ok());
    CHECK(oracle.feed("f4")->strikes == 2);
    REQUIRE(oracle.aggregate(2).ok());  // clean reading
    CHECK(oracle.feed("f4")->strikes == 0);

    AggregateResult last;
    for (Tick t = 3; t <= 5; ++t) {
        auto r = oracle.aggregate(t);
        REQUIRE(r.ok());
        last = r.value();
    }
    CHECK(last.quarantined_now == std::vector<std::string>{"f4"});
    CHECK(oracle.feed("f4")->trust == Trust::quarantined);

    // quarantined feeds stay out until governance reinstates them
    auto after = oracle.aggregate(6);
    REQUIRE(after.ok());
    CHECK(after.value().flagged.empty());

    auto notgov = oracle.reinstate("f1", "f4", 7);
    REQUIRE_FALSE(notgov.ok());
    CHECK(notgov.code() == Err::NotGovernance);
    REQUIRE(oracle.reinstate("gov", "f4", 7).ok());
    CHECK(oracle.feed("f4")->trust == Trust::normal);
}

TEST_CASE("fewer than three live feeds is not an aggregate") {
    ledger::Ledger l;
    REQUIRE(l.node_join("gov", ledger::Role::governance).ok());
    OracleService oracle(l, "gov");
    oracle.add_feed({"f1", "sensor", {{0, 10}}, Trust::normal, 0});
    oracle.add_feed({"f2", "sensor", {{0, 11}}, Trust::normal, 0});
    auto r = oracle.aggregate(0);
    REQUIRE_FALSE(r.ok());
    CHECK(r.code() == Err::InsufficientFeeds);
}
