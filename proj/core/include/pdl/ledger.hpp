#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdl/common.hpp"
#include "pdl/hash.hpp"

namespace pdl::ledger {

using nlohmann::json;

enum class Role { validator, governance, observer };

const char* to_string(Role r);
Role role_from_string(const std::string& s);

struct Node {
    std::string id;
    Role role = Role::validator;
    bool active = true;
    bool blacklisted = false;
    Tick last_seen = 0;
    // Simulated replica: digest of this node's local copy of each channel chain.
    std::map<std::string, std::string> replica_digest;
    bool replica_tampered = false;
};

struct Transaction {
    std::string tx_id;
    json payload;
    std::string submitter;
    std::string channel_id;
    Tick logical_time = 0;

    static Transaction make(json payload, std::string submitter, std::string channel_id,
                            Tick logical_time);

    json to_json() const;
    static Transaction from_json(const json& j);
};

struct Block {
    std::uint64_t height = 0;
    std::string prev_hash;
    std::vector<Transaction> tx_list;
    std::set<std::string> commit_votes;
    std::string block_hash;

    static std::string compute_hash(std::uint64_t height, const std::string& prev_hash,
                                    const std::vector<Transaction>& txs);

    json to_json() const;
    static Block from_json(const json& j);
};

enum class Verdict { approve, reject };

struct VoteRecord {
    std::string node;
    std::string tx_id;
    Verdict verdict = Verdict::approve;
    Tick tick = 0;
};

struct AuditCheck {
    std::string name;
    bool passed = false;
};

struct AuditReport {
    std::string node;
    Tick tick = 0;
    std::vector<AuditCheck> checks;
    bool suspect() const {
        for (const auto& c : checks)
            if (!c.passed) return true;
        return false;
    }
};

struct PendingReceipt {
    std::string tx_id;
    std::size_t pool_position = 0;
};

struct RejectedTx {
    std::string tx_id;
    std::string reason;  // "insufficient-quorum" or "invalid"
};

struct CommitResult {
    std::optional<std::uint64_t> block_height;
    std::vector<std::string> committed;
    std::vector<RejectedTx> rejected;
};

struct ChainVerdict {
    bool intact = true;
    std::optional<std::uint64_t> bad_height;
};

struct JoinResult {
    std::size_t active_validators = 0;
    std::size_t next_quorum = 0;
};

struct LeaveResult {
    std::size_t active_validators = 0;
    bool below_min_active = false;
};

struct Channel {
    std::string channel_id;
    std::set<std::string> members;
    std::vector<Block> blocks;
    std::vector<Transaction> pending;
};

struct LedgerConfig {
    std::size_t min_quorum = 1;
    std::size_t min_active = 1;
    double collusion_rate = 0.8;
    std::size_t min_votes = 10;
};

/// Simulated permissioned distributed ledger: nodes, channels, single-round
/// quorum voting, hash-chained blocks, governance actions.
class Ledger {
  public:
    static constexpr const char* kDefaultChannel = "default";

    explicit Ledger(LedgerConfig cfg = {}, std::string ledger_id = "pdl");

    const std::string& id() const { return ledger_id_; }
    const LedgerConfig& config() const { return cfg_; }

    // -- membership -------------------------------------------------------
    Result<JoinResult> node_join(const std::string& id, Role role = Role::validator);
    Result<LeaveResult> node_leave(const std::string& id);
    bool has_node(const std::string& id) const { return nodes_.count(id) > 0; }
    const Node* find_node(const std::string& id) const;
    bool is_governance(const std::string& id) const;

    /// Per-node vote policy override (scripted colluders etc.). The honest
    /// default approves any structurally valid payload.
    void set_vote_policy(const std::string& node,
                         std::function<bool(const Transaction&)> policy);

    // -- channels ---------------------------------------------------------
    Result<std::string> create_channel(const std::string& creator,
                                       const std::set<std::string>& members,
                                       const std::string& channel_id = {});
    bool has_channel(const std::string& channel_id) const;
    bool is_member(const std::string& channel_id, const std::string& node) const;
    std::vector<std::string> channel_ids() const;
    Result<std::vector<Block>> read_blocks(const std::string& channel_id,
                                           const std::string& reader) const;

    // -- transactions and consensus ---------------------------------------
    Result<PendingReceipt> submit_transaction(Transaction tx);
    Result<CommitResult> run_consensus_round(const std::string& channel_id, Tick now);
    bool has_pending(const std::string& channel_id) const;
    std::size_t pending_count(const std::string& channel_id) const;

    std::size_t active_validator_count(const std::string& channel_id) const;
    std::size_t quorum(const std::string& channel_id) const;

    // Committed-transaction lookup across a channel's chain.
    std::optional<Transaction> find_committed(const std::string& channel_id,
                                              const std::string& tx_id) const;
    std::vector<Transaction> committed_matching(
        const std::string& channel_id,
        const std::function<bool(const Transaction&)>& pred) const;

    // -- integrity --------------------------------------------------------
    ChainVerdict verify_chain(const std::string& channel_id) const;
    std::string tip_hash(const std::string& channel_id) const;
    std::uint64_t chain_height(const std::string& channel_id) const;

    // -- governance -------------------------------------------------------
    Status blacklist_node(const std::string& gov, const std::string& node,
                          const std::string& reason, Tick now);
    bool is_blacklisted(const std::string& node) const;
    Result<AuditReport> audit_node(const std::string& gov, const std::string& node, Tick now);

    // -- collusion --------------------------------------------------------
    Result<std::set<std::string>> detect_collusion(const std::string& channel_id, Tick from,
                                                   Tick to) const;
    const std::vector<VoteRecord>& vote_history(const std::string& channel_id) const;

    // -- export / import --------------------------------------------------
    Result<std::string> export_chain(const std::string& channel_id) const;
    static Result<std::vector<Block>> import_chain(const std::string& text);
    /// Verifies a previously exported chain: link structure and digests.
    static ChainVerdict verify_export(const std::string& text);

    // -- fault-injection hooks (tests and scenario faults) ----------------
    /// Mutates one committed transaction payload in place; verify_chain must
    /// then report corruption at that height.
    Status inject_tamper(const std::string& channel_id, std::uint64_t height);
    /// Corrupts a node's local replica digest so audits flag it.
    Status inject_replica_tamper(const std::string& node);

  private:
    static ChainVerdict verify_blocks(const std::vector<Block>& blocks);
    bool default_valid(const Transaction& tx) const;
    void sync_replicas(const Channel& ch);

    LedgerConfig cfg_;
    std::string ledger_id_;
    std::map<std::string, Node> nodes_;
    std::map<std::string, Channel> channels_;
    std::map<std::string, std::function<bool(const Transaction&)>> vote_policies_;
    std::map<std::string, std::vector<VoteRecord>> votes_;           // by channel
    std::map<std::string, std::map<std::string, bool>> outcomes_;    // channel -> tx -> committed
    std::set<std::string> seen_tx_ids_;
    std::uint64_t channel_seq_ = 0;
};

}  // namespace pdl::ledger
