// Microbenchmarks for the hot paths: consensus rounds, chain verification
// and oracle aggregation.
#include <benchmark/benchmark.h>

#include "pdl/ledger.hpp"
#include "pdl/monitoring.hpp"

namespace {

pdl::ledger::Ledger make_ledger(int validators) {
    pdl::ledger::Ledger l;
    l.node_join("gov", pdl::ledger::Role::governance);
    for (int i = 0; i < validators; ++i)
        l.node_join("v" + std::to_string(i), pdl::ledger::Role::validator);
    return l;
}

void BM_ConsensusRound(benchmark::State& state) {
    auto l = make_ledger(static_cast<int>(state.range(0)));
    pdl::Tick t = 0;
    for (auto _ : state) {
        for (int i = 0; i < 10; ++i) {
            auto tx = pdl::ledger::Transaction::make(
                nlohmann::json{{"type", "usage"}, {"n", i}, {"t", t}}, "v0",
                pdl::ledger::Ledger::kDefaultChannel, t);
            benchmark::DoNotOptimize(l.submit_transaction(std::move(tx)));
        }
        benchmark::DoNotOptimize(
            l.run_consensus_round(pdl::ledger::Ledger::kDefaultChannel, t));
        ++t;
    }
}
BENCHMARK(BM_ConsensusRound)->Arg(4)->Arg(7)->Arg(16);

void BM_VerifyChain(benchmark::State& state) {
    auto l = make_ledger(4);
    for (pdl::Tick t = 0; t < state.range(0); ++t) {
        auto tx = pdl::ledger::Transaction::make(nlohmann::json{{"type", "usage"}, {"t", t}},
                                                 "v0", pdl::ledger::Ledger::kDefaultChannel, t);
        (void)l.submit_transaction(std::move(tx));
        (void)l.run_consensus_round(pdl::ledger::Ledger::kDefaultChannel, t);
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(l.verify_chain(pdl::ledger::Ledger::kDefaultChannel));
}
BENCHMARK(BM_VerifyChain)->Arg(64)->Arg(256);

void BM_OracleAggregate(benchmark::State& state) {
    auto l = make_ledger(3);
    pdl::monitoring::OracleService oracle(l, "gov");
    for (int i = 0; i < state.range(0); ++i) {
        pdl::monitoring::OracleFeed f;
        f.feed_id = "f" + std::to_string(i);
        f.source = f.feed_id;
        for (pdl::Tick t = 0; t < 64; ++t)
            f.readings[t] = 10.0 + 0.01 * static_cast<double>(i);
        oracle.add_feed(std::move(f));
    }
    pdl::Tick t = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(oracle.aggregate(t));
        t = (t + 1) % 64;
    }
}
BENCHMARK(BM_OracleAggregate)->Arg(3)->Arg(9);

}  // namespace

BENCHMARK_MAIN();
