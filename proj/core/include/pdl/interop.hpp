#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdl/common.hpp"
#include "pdl/ledger.hpp"

namespace pdl::interop {

using nlohmann::json;

/// Field-rename mappings between record schema versions, with the fields
/// each version requires. Identity translation is always available between
/// equal versions.
struct TranslationTable {
    std::map<std::pair<int, int>, std::map<std::string, std::string>> mappings;
    std::map<int, std::vector<std::string>> required;

    bool supports(int src_ver, int dst_ver) const;
    static Result<TranslationTable> from_json(const json& j);
    json to_json() const;
};

/// Lossless on mapped fields: applying the inverse map to the output
/// reproduces the mapped subset of the input.
Result<json> translate_record(const json& record, int src_ver, int dst_ver,
                              const TranslationTable& table);

enum class Phase { proposed, locked, committed_both, aborted };

const char* to_string(Phase p);

struct RelayTransfer {
    std::string transfer_id;
    std::string src_ledger;
    std::string src_channel;
    std::string src_tx;
    std::string dst_ledger;
    std::string dst_channel;
    std::string record_hash;
    std::string translated_hash;
    Phase phase = Phase::proposed;
    Tick deadline = 0;

    // two-phase progress
    bool src_locked = false;
    bool dst_locked = false;
    bool dst_committed = false;
    bool src_confirmed = false;
    bool aborting = false;
    bool src_unlocked = false;
    bool dst_unlocked = false;
    Tick src_commit_tick = -1;
    Tick dst_commit_tick = -1;
    json translated_record;
};

struct SyncStatus {
    std::string ledger_a;
    std::string ledger_b;
    Tick last_matched_a = -1;
    Tick last_matched_b = -1;
    Tick divergence = 0;
    bool alert = false;
};

struct RelayConfig {
    Tick max_divergence = 10;
};

/// Notary-style cross-ledger relay: locks intent on both ledgers, commits the
/// translated record on the destination and a confirmation on the source, or
/// aborts past the deadline with compensating unlock records.
class RelayCoordinator {
  public:
    RelayCoordinator(ledger::Ledger& a, ledger::Ledger& b, std::string notary,
                     TranslationTable table, RelayConfig cfg = {});

    Result<std::string> start_transfer(const std::string& src_ledger_id,
                                       const std::string& src_channel, const std::string& tx_id,
                                       const std::string& dst_channel, int src_ver, int dst_ver,
                                       Tick deadline_ticks, Tick now);

    /// Advances every live transfer as far as consensus allows at this tick.
    void tick(Tick now);

    Result<SyncStatus> sync_check(Tick now);

    const RelayTransfer* find(const std::string& transfer_id) const;
    std::vector<const RelayTransfer*> transfers() const;
    bool all_terminal() const;

  private:
    ledger::Ledger& resolve(const std::string& ledger_id);
    /// Commits one payload on a ledger channel; true iff it committed now.
    bool commit_now(ledger::Ledger& l, const std::string& channel, json payload, Tick now);
    void advance(RelayTransfer& t, Tick now);

    ledger::Ledger& a_;
    ledger::Ledger& b_;
    std::string notary_;
    TranslationTable table_;
    RelayConfig cfg_;
    std::map<std::string, RelayTransfer> transfers_;
    std::uint64_t seq_ = 0;
};

}  // namespace pdl::interop
