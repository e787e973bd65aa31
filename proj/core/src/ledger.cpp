#include "pdl/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdl::ledger {

const char* to_string(Role r) {
    switch (r) {
        case Role::validator: return "validator";
        case Role::governance: return "governance";
        case Role::observer: return "observer";
    }
    return "?";
}

Role role_from_string(const std::string& s) {
    if (s == "validator") return Role::validator;
    if (s == "governance") return Role::governance;
    if (s == "observer") return Role::observer;
    throw std::invalid_argument("unknown role: " + s);
}

// ---------------------------------------------------------------- Transaction

Transaction Transaction::make(json payload, std::string submitter, std::string channel_id,
                              Tick logical_time) {
    Transaction tx;
    tx.payload = std::move(payload);
    tx.submitter = std::move(submitter);
    tx.channel_id = std::move(channel_id);
    tx.logical_time = logical_time;
    tx.tx_id = sha256_hex(canonical(tx.payload) + "|" + tx.submitter + "|" +
                          std::to_string(tx.logical_time));
    return tx;
}

json Transaction::to_json() const {
    return json{{"tx_id", tx_id},
                {"payload", payload},
                {"submitter", submitter},
                {"channel_id", channel_id},
                {"logical_time", logical_time}};
}

Transaction Transaction::from_json(const json& j) {
    Transaction tx;
    tx.tx_id = j.at("tx_id").get<std::string>();
    tx.payload = j.at("payload");
    tx.submitter = j.at("submitter").get<std::string>();
    tx.channel_id = j.at("channel_id").get<std::string>();
    tx.logical_time = j.at("logical_time").get<Tick>();
    return tx;
}

// ---------------------------------------------------------------------- Block

std::string Block::compute_hash(std::uint64_t height, const std::string& prev_hash,
                                const std::vector<Transaction>& txs) {
    json tx_arr = json::array();
    for (const auto& tx : txs) tx_arr.push_back(tx.to_json());
    return sha256_hex(std::to_string(height) + "|" + prev_hash + "|" + canonical(tx_arr));
}

json Block::to_json() const {
    json votes = json::array();
    for (const auto& v : commit_votes) votes.push_back(v);
    json txs = json::array();
    for (const auto& tx : tx_list) txs.push_back(tx.to_json());
    return json{{"height", height},
                {"prev_hash", prev_hash},
                {"tx_list", txs},
                {"commit_votes", votes}};
}

Block Block::from_json(const json& j) {
    Block b;
    b.height = j.at("height").get<std::uint64_t>();
    b.prev_hash = j.at("prev_hash").get<std::string>();
    for (const auto& t : j.at("tx_list")) b.tx_list.push_back(Transaction::from_json(t));
    for (const auto& v : j.at("commit_votes")) b.commit_votes.insert(v.get<std::string>());
    b.block_hash = compute_hash(b.height, b.prev_hash, b.tx_list);
    return b;
}

// --------------------------------------------------------------------- Ledger

Ledger::Ledger(LedgerConfig cfg, std::string ledger_id)
    : cfg_(cfg), ledger_id_(std::move(ledger_id)) {
    Channel def;
    def.channel_id = kDefaultChannel;
    Block genesis;
    genesis.height = 0;
    genesis.prev_hash = zero_digest();
    genesis.block_hash = Block::compute_hash(0, genesis.prev_hash, {});
    def.blocks.push_back(std::move(genesis));
    channels_.emplace(kDefaultChannel, std::move(def));
}

const Node* Ledger::find_node(const std::string& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

bool Ledger::is_governance(const std::string& id) const {
    const Node* n = find_node(id);
    return n && n->role == Role::governance;
}

Result<JoinResult> Ledger::node_join(const std::string& id, Role role) {
    if (nodes_.count(id)) return {Err::DuplicateId, "node id in use: " + id};
    Node n;
    n.id = id;
    n.role = role;
    nodes_.emplace(id, std::move(n));
    // every node is a member of the default channel
    channels_.at(kDefaultChannel).members.insert(id);
    JoinResult r;
    r.active_validators = active_validator_count(kDefaultChannel);
    r.next_quorum = quorum(kDefaultChannel);
    return r;
}

Result<LeaveResult> Ledger::node_leave(const std::string& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end() || !it->second.active)
        return {Err::UnknownNode, "no active node: " + id};
    it->second.active = false;
    LeaveResult r;
    r.active_validators = active_validator_count(kDefaultChannel);
    r.below_min_active = r.active_validators < cfg_.min_active;
    return r;
}

void Ledger::set_vote_policy(const std::string& node,
                             std::function<bool(const Transaction&)> policy) {
    vote_policies_[node] = std::move(policy);
}

Result<std::string> Ledger::create_channel(const std::string& creator,
                                           const std::set<std::string>& members,
                                           const std::string& channel_id) {
    if (!is_governance(creator)) return {Err::NotGovernance, creator + " is not governance"};
    for (const auto& m : members)
        if (!nodes_.count(m)) return {Err::UnknownMember, "unknown node: " + m};
    std::string id = channel_id.empty() ? "ch-" + std::to_string(++channel_seq_) : channel_id;
    if (channels_.count(id)) return {Err::DuplicateId, "channel exists: " + id};
    Channel ch;
    ch.channel_id = id;
    ch.members = members;
    Block genesis;
    genesis.height = 0;
    genesis.prev_hash = zero_digest();
    genesis.block_hash = Block::compute_hash(0, genesis.prev_hash, {});
    ch.blocks.push_back(std::move(genesis));
    channels_.emplace(id, std::move(ch));
    sync_replicas(channels_.at(id));
    return id;
}

bool Ledger::has_channel(const std::string& channel_id) const {
    return channels_.count(channel_id) > 0;
}

bool Ledger::is_member(const std::string& channel_id, const std::string& node) const {
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) return false;
    if (channel_id == kDefaultChannel) return nodes_.count(node) > 0;
    return it->second.members.count(node) > 0;
}

std::vector<std::string> Ledger::channel_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : channels_) out.push_back(id);
    return out;
}

Result<std::vector<Block>> Ledger::read_blocks(const std::string& channel_id,
                                               const std::string& reader) const {
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) return {Err::UnknownMember, "no channel: " + channel_id};
    if (!is_member(channel_id, reader))
        return {Err::NotMember, reader + " is not a member of " + channel_id};
    return it->second.blocks;
}

Result<PendingReceipt> Ledger::submit_transaction(Transaction tx) {
    auto chit = channels_.find(tx.channel_id);
    if (chit == channels_.end()) return {Err::UnknownMember, "no channel: " + tx.channel_id};
    const Node* n = find_node(tx.submitter);
    if (!n || !n->active || !is_member(tx.channel_id, tx.submitter))
        return {Err::NotMember, tx.submitter + " cannot submit on " + tx.channel_id};
    if (n->blacklisted) return {Err::Blacklisted, tx.submitter + " is blacklisted"};
    if (seen_tx_ids_.count(tx.tx_id)) return {Err::DuplicateTx, "duplicate tx: " + tx.tx_id};
    seen_tx_ids_.insert(tx.tx_id);
    chit->second.pending.push_back(std::move(tx));
    PendingReceipt r;
    r.tx_id = chit->second.pending.back().tx_id;
    r.pool_position = chit->second.pending.size() - 1;
    return r;
}

std::size_t Ledger::active_validator_count(const std::string& channel_id) const {
    std::size_t count = 0;
    for (const auto& [id, n] : nodes_)
        if (n.active && !n.blacklisted && n.role == Role::validator &&
            is_member(channel_id, id))
            ++count;
    return count;
}

std::size_t Ledger::quorum(const std::string& channel_id) const {
    std::size_t a = active_validator_count(channel_id);
    std::size_t q = (2 * a + 2) / 3;  // ceil(2a/3)
    return std::max(q, cfg_.min_quorum);
}

bool Ledger::default_valid(const Transaction& tx) const {
    return tx.payload.is_object() && !tx.payload.empty();
}

void Ledger::sync_replicas(const Channel& ch) {
    for (auto& [id, n] : nodes_) {
        if (!is_member(ch.channel_id, id)) continue;
        if (n.replica_tampered) continue;
        n.replica_digest[ch.channel_id] = ch.blocks.back().block_hash;
    }
}

Result<CommitResult> Ledger::run_consensus_round(const std::string& channel_id, Tick now) {
    auto chit = channels_.find(channel_id);
    if (chit == channels_.end()) return {Err::UnknownMember, "no channel: " + channel_id};
    Channel& ch = chit->second;
    if (ch.pending.empty()) return CommitResult{};

    std::vector<const Node*> actives;
    for (const auto& [id, n] : nodes_)
        if (n.active && !n.blacklisted && n.role == Role::validator && is_member(channel_id, id))
            actives.push_back(&n);
    // deterministic validator order
    std::sort(actives.begin(), actives.end(),
              [](const Node* a, const Node* b) { return a->id < b->id; });

    CommitResult res;
    if (actives.empty()) {
        for (auto& tx : ch.pending) {
            res.rejected.push_back({tx.tx_id, "insufficient-quorum"});
            outcomes_[channel_id][tx.tx_id] = false;
        }
        ch.pending.clear();
        return Error{Err::NoActiveValidators, "no active validators on " + channel_id};
    }

    const std::size_t q = quorum(channel_id);
    std::vector<Transaction> commit_set;
    std::set<std::string> approvers;
    for (auto& tx : ch.pending) {
        std::size_t approvals = 0;
        std::set<std::string> tx_approvers;
        for (const Node* n : actives) {
            bool approve;
            auto pit = vote_policies_.find(n->id);
            if (pit != vote_policies_.end())
                approve = pit->second(tx);
            else
                approve = default_valid(tx);
            votes_[channel_id].push_back(
                {n->id, tx.tx_id, approve ? Verdict::approve : Verdict::reject, now});
            if (approve) {
                ++approvals;
                tx_approvers.insert(n->id);
            }
        }
        if (approvals >= q) {
            commit_set.push_back(tx);
            res.committed.push_back(tx.tx_id);
            approvers.insert(tx_approvers.begin(), tx_approvers.end());
            outcomes_[channel_id][tx.tx_id] = true;
        } else {
            res.rejected.push_back(
                {tx.tx_id, default_valid(tx) ? "insufficient-quorum" : "invalid"});
            outcomes_[channel_id][tx.tx_id] = false;
        }
    }
    ch.pending.clear();

    if (!commit_set.empty()) {
        Block b;
        b.height = ch.blocks.back().height + 1;
        b.prev_hash = ch.blocks.back().block_hash;
        b.tx_list = std::move(commit_set);
        b.commit_votes = std::move(approvers);
        b.block_hash = Block::compute_hash(b.height, b.prev_hash, b.tx_list);
        ch.blocks.push_back(std::move(b));
        res.block_height = ch.blocks.back().height;
        sync_replicas(ch);
    }
    return res;
}

bool Ledger::has_pending(const std::string& channel_id) const {
    auto it = channels_.find(channel_id);
    return it != channels_.end() && !it->second.pending.empty();
}

std::size_t Ledger::pending_count(const std::string& channel_id) const {
    auto it = channels_.find(channel_id);
    return it == channels_.end() ? 0 : it->second.pending.size();
}

std::optional<Transaction> Ledger::find_committed(const std::string& channel_id,
                                                  const std::string& tx_id) const {
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) return std::nullopt;
    for (const auto& b : it->second.blocks)
        for (const auto& tx : b.tx_list)
            if (tx.tx_id == tx_id) return tx;
    return std::nullopt;
}

std::vector<Transaction> Ledger::committed_matching(
    const std::string& channel_id, const std::function<bool(const Transaction&)>& pred) const {
    std::vector<Transaction> out;
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) return out;
    for (const auto& b : it->second.blocks)
        for (const auto& tx : b.tx_list)
            if (pred(tx)) out.push_back(tx);
    return out;
}

ChainVerdict Ledger::verify_blocks(const std::vector<Block>& blocks) {
    std::string prev = zero_digest();
    for (const auto& b : blocks) {
        if (b.prev_hash != prev) return {false, b.height};
        std::string h = Block::compute_hash(b.height, b.prev_hash, b.tx_list);
        if (h != b.block_hash) return {false, b.height};
        prev = b.block_hash;
    }
    return {true, std::nullopt};
}

ChainVerdict Ledger::verify_chain(const std::string& channel_id) const {
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) return {false, 0};
    return verify_blocks(it->second.blocks);
}

std::string Ledger::tip_hash(const std::string& channel_id) const {
    return channels_.at(channel_id).blocks.back().block_hash;
}

std::uint64_t Ledger::chain_height(const std::string& channel_id) const {
    return channels_.at(channel_id).blocks.back().height;
}

Status Ledger::blacklist_node(const std::string& gov, const std::string& node,
                              const std::string& reason, Tick now) {
    if (!is_governance(gov)) return {Err::NotGovernance, gov + " is not governance"};
    auto it = nodes_.find(node);
    if (it == nodes_.end()) return {Err::UnknownNode, "unknown node: " + node};
    it->second.blacklisted = true;
    auto tx = Transaction::make(
        json{{"type", "governance"}, {"action", "blacklist"}, {"node", node}, {"reason", reason}},
        gov, kDefaultChannel, now);
    auto r = submit_transaction(std::move(tx));
    if (!r) return r.error();
    return ok_status();
}

bool Ledger::is_blacklisted(const std::string& node) const {
    const Node* n = find_node(node);
    return n && n->blacklisted;
}

Result<AuditReport> Ledger::audit_node(const std::string& gov, const std::string& node,
                                       Tick now) {
    if (!is_governance(gov)) return {Err::NotGovernance, gov + " is not governance"};
    auto it = nodes_.find(node);
    if (it == nodes_.end()) return {Err::UnknownNode, "unknown node: " + node};
    const Node& n = it->second;

    AuditReport rep;
    rep.node = node;
    rep.tick = now;

    bool chain_ok = true;
    for (const auto& [cid, ch] : channels_) {
        if (!is_member(cid, node)) continue;
        auto rit = n.replica_digest.find(cid);
        std::string expect = ch.blocks.back().block_hash;
        // a replica never synced counts as matching only for an empty chain
        std::string have = rit == n.replica_digest.end() ? expect : rit->second;
        if (n.replica_tampered || have != expect) chain_ok = false;
    }
    rep.checks.push_back({"chain-copy", chain_ok});

    bool votes_ok = true;
    for (const auto& [cid, hist] : votes_) {
        std::set<std::pair<std::string, Tick>> seen;
        for (const auto& v : hist) {
            if (v.node != node) continue;
            if (!seen.insert({v.tx_id, v.tick}).second) votes_ok = false;
        }
    }
    rep.checks.push_back({"vote-history", votes_ok});
    rep.checks.push_back({"clock", n.last_seen <= now});

    if (rep.suspect()) {
        auto tx = Transaction::make(json{{"type", "governance"},
                                         {"action", "audit-alert"},
                                         {"node", node},
                                         {"tick", now}},
                                    gov, kDefaultChannel, now);
        (void)submit_transaction(std::move(tx));
    }
    return rep;
}

Result<std::set<std::string>> Ledger::detect_collusion(const std::string& channel_id, Tick from,
                                                       Tick to) const {
    auto vit = votes_.find(channel_id);
    std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // node -> (votes, rejects)
    std::size_t in_window = 0;
    if (vit != votes_.end()) {
        auto oit = outcomes_.find(channel_id);
        for (const auto& v : vit->second) {
            if (v.tick < from || v.tick > to) continue;
            ++in_window;
            if (oit == outcomes_.end()) continue;
            auto o = oit->second.find(v.tx_id);
            if (o == oit->second.end() || !o->second) continue;  // only committed txs count
            auto& s = stats[v.node];
            ++s.first;
            if (v.verdict == Verdict::reject) ++s.second;
        }
    }
    if (in_window == 0) return {Err::EmptyWindow, "no votes in window"};
    std::set<std::string> flagged;
    for (const auto& [node, s] : stats) {
        if (s.first < cfg_.min_votes) continue;
        double rate = static_cast<double>(s.second) / static_cast<double>(s.first);
        if (rate > cfg_.collusion_rate) flagged.insert(node);
    }
    return flagged;
}

const std::vector<VoteRecord>& Ledger::vote_history(const std::string& channel_id) const {
    static const std::vector<VoteRecord> empty;
    auto it = votes_.find(channel_id);
    return it == votes_.end() ? empty : it->second;
}

Result<std::string> Ledger::export_chain(const std::string& channel_id) const {
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) return {Err::UnknownMember, "no channel: " + channel_id};
    std::ostringstream os;
    for (const auto& b : it->second.blocks)
        os << canonical(b.to_json()) << ' ' << b.block_hash << '\n';
    return os.str();
}

Result<std::vector<Block>> Ledger::import_chain(const std::string& text) {
    std::vector<Block> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto sp = line.rfind(' ');
        if (sp == std::string::npos) return {Err::CorruptLog, "missing digest"};
        json j = json::parse(line.substr(0, sp), nullptr, false);
        if (j.is_discarded()) return {Err::CorruptLog, "bad block json"};
        Block b = Block::from_json(j);
        if (b.block_hash != line.substr(sp + 1))
            return {Err::HashMismatch, "digest mismatch at height " + std::to_string(b.height)};
        out.push_back(std::move(b));
    }
    return out;
}

ChainVerdict Ledger::verify_export(const std::string& text) {
    auto blocks = import_chain(text);
    if (!blocks) return {false, 0};
    return verify_blocks(blocks.value());
}

Status Ledger::inject_tamper(const std::string& channel_id, std::uint64_t height) {
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) return {Err::UnknownMember, "no channel: " + channel_id};
    auto& blocks = it->second.blocks;
    if (height >= blocks.size()) return {Err::NotFound, "no block at that height"};
    Block& b = blocks[height];
    if (b.tx_list.empty()) {
        // tamper the link instead
        b.prev_hash[0] = b.prev_hash[0] == '0' ? '1' : '0';
    } else {
        b.tx_list[0].payload["__tampered"] = true;
    }
    return ok_status();
}

Status Ledger::inject_replica_tamper(const std::string& node) {
    auto it = nodes_.find(node);
    if (it == nodes_.end()) return {Err::UnknownNode, "unknown node: " + node};
    it->second.replica_tampered = true;
    for (auto& [cid, d] : it->second.replica_digest) d = std::string(64, 'f');
    return ok_status();
}

}  // namespace pdl::ledger
