#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdl/common.hpp"
#include "pdl/ledger.hpp"

namespace pdl::contracts {

using nlohmann::json;

/// Identity used when a timer fires or the runtime acts on its own behalf.
inline constexpr const char* kSystemIdentity = "@system";

enum class Kind { it_sc, ac_sc, so_sc, sr_sc, generic };
enum class ContractStatus { Installed, Active, Interrupted, Terminated };
enum class Outcome { ok, denied, failed };
enum class Command { interrupt, resume, terminate };

const char* to_string(Kind k);
const char* to_string(ContractStatus s);
const char* to_string(Outcome o);
Kind kind_from_string(const std::string& s);

struct Timer {
    std::string timer_id;
    Tick fire_at = 0;
    std::string action;
    bool armed = true;
};

struct InvocationRecord {
    std::string contract_id;
    std::string function;
    std::string caller;
    std::string args_digest;
    std::size_t call_depth = 0;
    Tick tick = 0;
    Outcome outcome = Outcome::ok;

    json to_json() const;
};

struct ControlInstruction {
    std::string issuer;
    std::string target;
    Command command = Command::interrupt;
    Tick tick = 0;
};

struct TerminationProof {
    std::string contract_id;
    Tick tick = 0;
    std::string cleared_state_hash;
};

/// One installed contract: an immutable descriptor plus mutable run state.
struct Contract {
    std::string contract_id;
    Kind kind = Kind::generic;
    ContractStatus status = ContractStatus::Installed;
    json descriptor;  // immutable after install
    json state_vars;  // object
    std::string owner;
    std::string channel_id;
    std::map<std::string, std::set<std::string>> acl;  // function -> callers
    std::vector<Timer> timers;
};

struct RuntimeConfig {
    std::size_t max_call_depth = 4;
    std::size_t onchain_payload_limit = 1024;
};

/// Validates a descriptor document; returns its canonical digest (the
/// contract id) on success.
Result<std::string> validate_descriptor(const json& descriptor);

/// Hosts smart contracts as deterministic state machines backed by a ledger.
class Runtime {
  public:
    Runtime(ledger::Ledger& ledger, RuntimeConfig cfg = {});

    const RuntimeConfig& config() const { return cfg_; }

    Result<std::string> install_contract(const json& descriptor, const std::string& channel_id,
                                         const std::string& submitter, Tick now);
    Status activate(const std::string& contract_id, const std::string& caller, Tick now);

    Result<InvocationRecord> invoke(const std::string& contract_id, const std::string& function,
                                    const std::string& caller, const json& args, Tick now);

    /// Fires every armed timer due at or before `now`, ordered by
    /// (fire_at, contract_id, timer_id).
    std::vector<InvocationRecord> tick(Tick now);

    Result<ContractStatus> apply_control(const ControlInstruction& instr);
    Result<TerminationProof> terminate_contract(const std::string& contract_id,
                                                const std::string& caller, Tick now);

    Result<std::string> store_offchain(const std::string& contract_id, const std::string& payload);
    Result<std::string> load_offchain(const std::string& content_ref) const;

    const Contract* find(const std::string& contract_id) const;
    std::vector<std::string> contract_ids() const;
    const std::vector<InvocationRecord>& invocation_log() const { return log_; }

    /// Arms an additional timer on an installed/active contract (used by the
    /// lifecycle layer for checkpoint schedules).
    Status arm_timer(const std::string& contract_id, Timer t);

    // fault-injection hook: corrupts a stored off-chain payload
    Status inject_offchain_tamper(const std::string& content_ref);

  private:
    struct Frame {
        std::vector<std::string> chain;  // contract ids on the current call path
    };

    Result<InvocationRecord> invoke_internal(const std::string& contract_id,
                                             const std::string& function,
                                             const std::string& caller, const json& args,
                                             Tick now, Frame& frame);
    void record(const InvocationRecord& rec, const Contract& c);

    ledger::Ledger& ledger_;
    RuntimeConfig cfg_;
    std::map<std::string, Contract> contracts_;
    std::map<std::string, std::string> offchain_;  // ref -> payload
    std::vector<InvocationRecord> log_;
};

}  // namespace pdl::contracts
