#include "pdl/interop.hpp"

#include <algorithm>

#include "pdl/hash.hpp"

namespace pdl::interop {

const char* to_string(Phase p) {
    switch (p) {
        case Phase::proposed: return "proposed";
        case Phase::locked: return "locked";
        case Phase::committed_both: return "committed-both";
        case Phase::aborted: return "aborted";
    }
    return "?";
}

bool TranslationTable::supports(int src_ver, int dst_ver) const {
    return src_ver == dst_ver || mappings.count({src_ver, dst_ver}) > 0;
}

Result<TranslationTable> TranslationTable::from_json(const json& j) {
    if (j.value("schema", 0) != 1) return {Err::SchemaMismatch, "translation table schema"};
    TranslationTable t;
    try {
        for (const auto& m : j.value("mappings", json::array())) {
            int src = m.at("src_ver").get<int>();
            int dst = m.at("dst_ver").get<int>();
            std::map<std::string, std::string> fields;
            for (const auto& [from, to] : m.at("fields").items())
                fields[from] = to.get<std::string>();
            t.mappings[{src, dst}] = std::move(fields);
        }
        const json required = j.value("required", json::object());
        for (const auto& [ver, req] : required.items())
            for (const auto& f : req)
                t.required[std::stoi(ver)].push_back(f.get<std::string>());
    } catch (const std::exception& e) {
        return {Err::ScenarioParseError, e.what()};
    }
    return t;
}

json TranslationTable::to_json() const {
    json maps = json::array();
    for (const auto& [key, fields] : mappings) {
        json f = json::object();
        for (const auto& [from, to] : fields) f[from] = to;
        maps.push_back(json{{"src_ver", key.first}, {"dst_ver", key.second}, {"fields", f}});
    }
    json req = json::object();
    for (const auto& [ver, names] : required) {
        json arr = json::array();
        for (const auto& n : names) arr.push_back(n);
        req[std::to_string(ver)] = arr;
    }
    return json{{"schema", 1}, {"mappings", maps}, {"required", req}};
}

Result<json> translate_record(const json& record, int src_ver, int dst_ver,
                              const TranslationTable& table) {
    if (src_ver == dst_ver) return record;
    auto it = table.mappings.find({src_ver, dst_ver});
    if (it == table.mappings.end())
        return {Err::TranslationUnsupported,
                "no mapping " + std::to_string(src_ver) + "->" + std::to_string(dst_ver)};
    json out = json::object();
    for (const auto& [field, value] : record.items()) {
        auto f = it->second.find(field);
        if (f != it->second.end()) out[f->second] = value;
    }
    auto req = table.required.find(dst_ver);
    if (req != table.required.end()) {
        for (const auto& name : req->second)
            if (!out.contains(name))
                return {Err::FieldLoss, "required field missing after mapping: " + name};
    }
    return out;
}

RelayCoordinator::RelayCoordinator(ledger::Ledger& a, ledger::Ledger& b, std::string notary,
                                   TranslationTable table, RelayConfig cfg)
    : a_(a), b_(b), notary_(std::move(notary)), table_(std::move(table)), cfg_(cfg) {}

ledger::Ledger& RelayCoordinator::resolve(const std::string& ledger_id) {
    return ledger_id == a_.id() ? a_ : b_;
}

bool RelayCoordinator::commit_now(ledger::Ledger& l, const std::string& channel, json payload,
                                  Tick now) {
    payload["relay_seq"] = ++seq_;
    auto tx = ledger::Transaction::make(std::move(payload), notary_, channel, now);
    const std::string tx_id = tx.tx_id;
    auto sub = l.submit_transaction(std::move(tx));
    if (!sub) return false;
    auto round = l.run_consensus_round(channel, now);
    if (!round) return false;
    return std::find(round.value().committed.begin(), round.value().committed.end(), tx_id) !=
           round.value().committed.end();
}

Result<std::string> RelayCoordinator::start_transfer(const std::string& src_ledger_id,
                                                     const std::string& src_channel,
                                                     const std::string& tx_id,
                                                     const std::string& dst_channel,
                                                     int src_ver, int dst_ver,
                                                     Tick deadline_ticks, Tick now) {
    ledger::Ledger& src = resolve(src_ledger_id);
    ledger::Ledger& dst = src_ledger_id == a_.id() ? b_ : a_;
    if (!src.is_governance(notary_) || !dst.is_governance(notary_))
        return {Err::NotGovernance, "notary not registered on both ledgers"};
    auto tx = src.find_committed(src_channel, tx_id);
    if (!tx) return {Err::UnknownTx, "tx not committed on source: " + tx_id};
    if (!table_.supports(src_ver, dst_ver))
        return {Err::TranslationUnsupported, "no schema mapping for record type"};
    auto translated = translate_record(tx->payload, src_ver, dst_ver, table_);
    if (!translated) return translated.error();

    RelayTransfer t;
    t.transfer_id = "xfer-" + std::to_string(transfers_.size());
    t.src_ledger = src.id();
    t.src_channel = src_channel;
    t.src_tx = tx_id;
    t.dst_ledger = dst.id();
    t.dst_channel = dst_channel;
    t.record_hash = digest_of(tx->payload);
    t.translated_record = translated.value();
    t.translated_hash = digest_of(translated.value());
    t.deadline = now + deadline_ticks;
    std::string id = t.transfer_id;
    transfers_.emplace(id, std::move(t));
    advance(transfers_.at(id), now);
    return id;
}

void RelayCoordinator::advance(RelayTransfer& t, Tick now) {
    if (t.phase == Phase::committed_both || t.phase == Phase::aborted) return;
    ledger::Ledger& src = resolve(t.src_ledger);
    ledger::Ledger& dst = resolve(t.dst_ledger);

    if (!t.aborting && now > t.deadline && t.phase != Phase::committed_both) t.aborting = true;

    if (t.aborting) {
        // compensating unlocks; the chain stays append-only
        if (t.src_locked && !t.src_unlocked &&
            commit_now(src, t.src_channel,
                       json{{"type", "relay-unlock"}, {"transfer", t.transfer_id}}, now))
            t.src_unlocked = true;
        if (t.dst_locked && !t.dst_unlocked &&
            commit_now(dst, t.dst_channel,
                       json{{"type", "relay-unlock"}, {"transfer", t.transfer_id}}, now))
            t.dst_unlocked = true;
        if ((!t.src_locked || t.src_unlocked) && (!t.dst_locked || t.dst_unlocked))
            t.phase = Phase::aborted;
        return;
    }

    if (!t.src_locked) {
        if (!commit_now(src, t.src_channel,
                        json{{"type", "relay-lock"},
                             {"transfer", t.transfer_id},
                             {"record_hash", t.record_hash}},
                        now))
            return;
        t.src_locked = true;
    }
    if (!t.dst_locked) {
        if (!commit_now(dst, t.dst_channel,
                        json{{"type", "relay-lock"},
                             {"transfer", t.transfer_id},
                             {"record_hash", t.record_hash}},
                        now))
            return;
        t.dst_locked = true;
        t.phase = Phase::locked;
    }
    if (!t.dst_committed) {
        if (!commit_now(dst, t.dst_channel,
                        json{{"type", "relay-record"},
                             {"transfer", t.transfer_id},
                             {"record", t.translated_record},
                             {"origin_hash", t.record_hash},
                             {"translated_hash", t.translated_hash}},
                        now))
            return;
        t.dst_committed = true;
        t.dst_commit_tick = now;
    }
    if (!t.src_confirmed) {
        if (!commit_now(src, t.src_channel,
                        json{{"type", "relay-confirm"},
                             {"transfer", t.transfer_id},
                             {"origin_hash", t.record_hash}},
                        now))
            return;
        t.src_confirmed = true;
        t.src_commit_tick = now;
        t.phase = Phase::committed_both;
    }
}

void RelayCoordinator::tick(Tick now) {
    for (auto& [_, t] : transfers_) advance(t, now);
}

Result<SyncStatus> RelayCoordinator::sync_check(Tick now) {
    if (transfers_.empty()) return {Err::NoHistory, "no transfers attempted"};
    SyncStatus st;
    st.ledger_a = a_.id();
    st.ledger_b = b_.id();
    const RelayTransfer* latest = nullptr;
    for (const auto& [_, t] : transfers_) {
        if (t.phase != Phase::committed_both) continue;
        if (!latest || t.src_commit_tick > latest->src_commit_tick) latest = &t;
    }
    if (latest) {
        Tick ta = latest->src_ledger == a_.id() ? latest->src_commit_tick
                                                : latest->dst_commit_tick;
        Tick tb = latest->src_ledger == a_.id() ? latest->dst_commit_tick
                                                : latest->src_commit_tick;
        st.last_matched_a = ta;
        st.last_matched_b = tb;
        st.divergence = ta > tb ? ta - tb : tb - ta;
        if (st.divergence > cfg_.max_divergence) {
            st.alert = true;
            for (ledger::Ledger* l : {&a_, &b_}) {
                auto tx = ledger::Transaction::make(
                    json{{"type", "governance"},
                         {"action", "sync-divergence-alert"},
                         {"divergence", st.divergence},
                         {"tick", now}},
                    notary_, ledger::Ledger::kDefaultChannel, now);
                (void)l->submit_transaction(std::move(tx));
            }
        }
    }
    return st;
}

const RelayTransfer* RelayCoordinator::find(const std::string& transfer_id) const {
    auto it = transfers_.find(transfer_id);
    return it == transfers_.end() ? nullptr : &it->second;
}

std::vector<const RelayTransfer*> RelayCoordinator::transfers() const {
    std::vector<const RelayTransfer*> out;
    for (const auto& [_, t] : transfers_) out.push_back(&t);
    return out;
}

bool RelayCoordinator::all_terminal() const {
    for (const auto& [_, t] : transfers_)
        if (t.phase != Phase::committed_both && t.phase != Phase::aborted) return false;
    return true;
}

}  // namespace pdl::interop
