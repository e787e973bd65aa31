#include "pdl/contracts.hpp"

#include <algorithm>

#include "pdl/hash.hpp"

namespace pdl::contracts {

const char* to_string(Kind k) {
    switch (k) {
        case Kind::it_sc: return "it-sc";
        case Kind::ac_sc: return "ac-sc";
        case Kind::so_sc: return "so-sc";
        case Kind::sr_sc: return "sr-sc";
        case Kind::generic: return "generic";
    }
    return "?";
}

const char* to_string(ContractStatus s) {
    switch (s) {
        case ContractStatus::Installed: return "Installed";
        case ContractStatus::Active: return "Active";
        case ContractStatus::Interrupted: return "Interrupted";
        case ContractStatus::Terminated: return "Terminated";
    }
    return "?";
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::ok: return "ok";
        case Outcome::denied: return "denied";
        case Outcome::failed: return "failed";
    }
    return "?";
}

Kind kind_from_string(const std::string& s) {
    if (s == "it-sc") return Kind::it_sc;
    if (s == "ac-sc") return Kind::ac_sc;
    if (s == "so-sc") return Kind::so_sc;
    if (s == "sr-sc") return Kind::sr_sc;
    if (s == "generic") return Kind::generic;
    throw std::invalid_argument("unknown contract kind: " + s);
}

json InvocationRecord::to_json() const {
    return json{{"type", "invocation"},
                {"contract_id", contract_id},
                {"function", function},
                {"caller", caller},
                {"args_digest", args_digest},
                {"call_depth", call_depth},
                {"tick", tick},
                {"outcome", to_string(outcome)}};
}

Result<std::string> validate_descriptor(const json& d) {
    if (!d.is_object()) return {Err::MalformedDescriptor, "descriptor must be an object"};
    if (d.value("schema", 0) != 1) return {Err::MalformedDescriptor, "unsupported schema"};
    if (!d.contains("kind") || !d.at("kind").is_string())
        return {Err::MalformedDescriptor, "missing kind"};
    try {
        kind_from_string(d.at("kind").get<std::string>());
    } catch (const std::exception& e) {
        return {Err::MalformedDescriptor, e.what()};
    }
    if (!d.contains("owner") || !d.at("owner").is_string())
        return {Err::MalformedDescriptor, "missing owner"};
    if (!d.contains("functions") || !d.at("functions").is_object())
        return {Err::MalformedDescriptor, "missing functions"};
    if (d.contains("state") && !d.at("state").is_object())
        return {Err::MalformedDescriptor, "state must be an object"};
    const json& fns = d.at("functions");
    for (const auto& [fname, body] : fns.items()) {
        if (!body.is_object())
            return {Err::MalformedDescriptor, "function body must be an object: " + fname};
        if (body.contains("sets") && !body.at("sets").is_object())
            return {Err::MalformedDescriptor, "sets must be an object in " + fname};
        if (body.contains("requires") && !body.at("requires").is_object())
            return {Err::MalformedDescriptor, "requires must be an object in " + fname};
        if (body.contains("calls")) {
            if (!body.at("calls").is_array())
                return {Err::MalformedDescriptor, "calls must be an array in " + fname};
            for (const auto& c : body.at("calls"))
                if (!c.is_object() || !c.contains("contract_var") || !c.contains("function"))
                    return {Err::MalformedDescriptor, "bad call entry in " + fname};
        }
    }
    if (d.contains("acl")) {
        if (!d.at("acl").is_object()) return {Err::MalformedDescriptor, "acl must be an object"};
        for (const auto& [fname, callers] : d.at("acl").items()) {
            if (!fns.contains(fname))
                return {Err::MalformedDescriptor, "acl entry for undeclared function: " + fname};
            if (!callers.is_array())
                return {Err::MalformedDescriptor, "acl callers must be an array"};
        }
    }
    if (d.contains("timers")) {
        if (!d.at("timers").is_array())
            return {Err::MalformedDescriptor, "timers must be an array"};
        for (const auto& t : d.at("timers")) {
            if (!t.is_object() || !t.contains("timer_id") || !t.contains("fire_at") ||
                !t.contains("action"))
                return {Err::MalformedDescriptor, "bad timer entry"};
            if (!fns.contains(t.at("action").get<std::string>()))
                return {Err::MalformedDescriptor,
                        "timer action not a declared function: " +
                            t.at("action").get<std::string>()};
        }
    }
    return digest_of(d);
}

Runtime::Runtime(ledger::Ledger& ledger, RuntimeConfig cfg) : ledger_(ledger), cfg_(cfg) {}

Result<std::string> Runtime::install_contract(const json& descriptor,
                                              const std::string& channel_id,
                                              const std::string& submitter, Tick now) {
    auto idr = validate_descriptor(descriptor);
    if (!idr) return idr;
    const std::string id = idr.value();
    if (contracts_.count(id)) return {Err::AlreadyInstalled, "contract already installed: " + id};

    auto tx = ledger::Transaction::make(
        json{{"type", "contract-install"}, {"contract_id", id}, {"descriptor", descriptor}},
        submitter, channel_id, now);
    const std::string tx_id = tx.tx_id;
    auto sub = ledger_.submit_transaction(std::move(tx));
    if (!sub) return {Err::CommitFailed, "install tx not accepted: " + sub.error().message};
    auto round = ledger_.run_consensus_round(channel_id, now);
    if (!round) return {Err::CommitFailed, "install tx not committed: " + round.error().message};
    bool committed = std::find(round.value().committed.begin(), round.value().committed.end(),
                               tx_id) != round.value().committed.end();
    if (!committed) return {Err::CommitFailed, "install tx rejected by consensus"};

    Contract c;
    c.contract_id = id;
    c.kind = kind_from_string(descriptor.at("kind").get<std::string>());
    c.descriptor = descriptor;
    c.state_vars = descriptor.value("state", json::object());
    c.owner = descriptor.at("owner").get<std::string>();
    c.channel_id = channel_id;
    if (descriptor.contains("acl"))
        for (const auto& [fname, callers] : descriptor.at("acl").items())
            for (const auto& caller : callers) c.acl[fname].insert(caller.get<std::string>());
    if (descriptor.contains("timers")) {
        for (const auto& t : descriptor.at("timers")) {
            Timer tm;
            tm.timer_id = t.at("timer_id").get<std::string>();
            tm.fire_at = t.at("fire_at").get<Tick>();
            tm.action = t.at("action").get<std::string>();
            c.timers.push_back(tm);
            // declaring a timer grants the system identity the right to fire it
            c.acl[tm.action].insert(kSystemIdentity);
        }
    }
    contracts_.emplace(id, std::move(c));
    return id;
}

Status Runtime::activate(const std::string& contract_id, const std::string& caller, Tick now) {
    auto it = contracts_.find(contract_id);
    if (it == contracts_.end()) return {Err::UnknownContract, contract_id};
    Contract& c = it->second;
    if (caller != c.owner && caller != kSystemIdentity && !ledger_.is_governance(caller))
        return {Err::NotAuthorized, caller + " may not activate"};
    if (c.status != ContractStatus::Installed)
        return {Err::TransitionFailed, "contract not in Installed state"};
    c.status = ContractStatus::Active;
    auto tx = ledger::Transaction::make(
        json{{"type", "contract-activate"}, {"contract_id", contract_id}, {"tick", now}}, caller,
        c.channel_id, now);
    (void)ledger_.submit_transaction(std::move(tx));
    return ok_status();
}

void Runtime::record(const InvocationRecord& rec, const Contract& c) {
    log_.push_back(rec);
    json payload = rec.to_json();
    payload["seq"] = log_.size();  // disambiguates otherwise identical records
    auto tx = ledger::Transaction::make(std::move(payload), c.owner, c.channel_id, rec.tick);
    (void)ledger_.submit_transaction(std::move(tx));
}

Result<InvocationRecord> Runtime::invoke(const std::string& contract_id,
                                         const std::string& function, const std::string& caller,
                                         const json& args, Tick now) {
    Frame frame;
    return invoke_internal(contract_id, function, caller, args, now, frame);
}

Result<InvocationRecord> Runtime::invoke_internal(const std::string& contract_id,
                                                  const std::string& function,
                                                  const std::string& caller, const json& args,
                                                  Tick now, Frame& frame) {
    InvocationRecord rec;
    rec.contract_id = contract_id;
    rec.function = function;
    rec.caller = caller;
    rec.args_digest = digest_of(args);
    rec.call_depth = frame.chain.size() + 1;
    rec.tick = now;

    auto it = contracts_.find(contract_id);
    if (it == contracts_.end()) return {Err::UnknownContract, contract_id};
    Contract& c = it->second;

    auto deny = [&](Err code, const std::string& msg, Outcome out) -> Result<InvocationRecord> {
        rec.outcome = out;
        record(rec, c);
        return Error{code, msg};
    };

    if (c.status != ContractStatus::Active)
        return deny(Err::ContractNotActive,
                    "contract is " + std::string(to_string(c.status)), Outcome::denied);
    if (rec.call_depth > cfg_.max_call_depth)
        return deny(Err::CallDepthExceeded, "call depth exceeds limit", Outcome::denied);
    if (std::find(frame.chain.begin(), frame.chain.end(), contract_id) != frame.chain.end())
        return deny(Err::ReentrancyDenied, "contract already on call chain", Outcome::denied);

    const json& fns = c.descriptor.at("functions");
    if (!fns.contains(function))
        return deny(Err::TransitionFailed, "unknown function: " + function, Outcome::failed);

    auto aclit = c.acl.find(function);
    if (aclit == c.acl.end() || !aclit->second.count(caller))
        return deny(Err::AccessDenied, caller + " not in acl of " + function, Outcome::denied);

    const json& body = fns.at(function);
    if (body.contains("requires")) {
        for (const auto& [var, want] : body.at("requires").items()) {
            if (!c.state_vars.contains(var) || c.state_vars.at(var) != want)
                return deny(Err::TransitionFailed, "guard failed on " + var, Outcome::failed);
        }
    }

    // compute the new state without touching the contract yet
    json new_state = c.state_vars;
    if (body.contains("sets")) {
        for (const auto& [var, val] : body.at("sets").items()) {
            if (val.is_string() && !val.get<std::string>().empty() &&
                val.get<std::string>()[0] == '$') {
                std::string arg = val.get<std::string>().substr(1);
                if (!args.contains(arg))
                    return deny(Err::TransitionFailed, "missing argument: " + arg,
                                Outcome::failed);
                new_state[var] = args.at(arg);
            } else {
                new_state[var] = val;
            }
        }
    }

    // cross-contract calls re-check the callee's ACL with this contract as caller
    if (body.contains("calls")) {
        frame.chain.push_back(contract_id);
        for (const auto& call : body.at("calls")) {
            std::string var = call.at("contract_var").get<std::string>();
            if (!new_state.contains(var) || !new_state.at(var).is_string()) {
                frame.chain.pop_back();
                return deny(Err::TransitionFailed, "call target var unset: " + var,
                            Outcome::failed);
            }
            auto inner =
                invoke_internal(new_state.at(var).get<std::string>(),
                                call.at("function").get<std::string>(), contract_id,
                                call.value("args", json::object()), now, frame);
            if (!inner) {
                frame.chain.pop_back();
                rec.outcome = Outcome::failed;
                record(rec, c);
                return inner.error();
            }
        }
        frame.chain.pop_back();
    }

    c.state_vars = std::move(new_state);
    rec.outcome = Outcome::ok;
    record(rec, c);
    return rec;
}

std::vector<InvocationRecord> Runtime::tick(Tick now) {
    struct Due {
        Tick fire_at;
        std::string contract_id;
        std::string timer_id;
        std::string action;
    };
    std::vector<Due> due;
    for (auto& [id, c] : contracts_) {
        if (c.status == ContractStatus::Terminated) continue;
        for (auto& t : c.timers)
            if (t.armed && t.fire_at <= now) due.push_back({t.fire_at, id, t.timer_id, t.action});
    }
    std::sort(due.begin(), due.end(), [](const Due& a, const Due& b) {
        return std::tie(a.fire_at, a.contract_id, a.timer_id) <
               std::tie(b.fire_at, b.contract_id, b.timer_id);
    });

    std::vector<InvocationRecord> fired;
    for (const auto& d : due) {
        auto cit = contracts_.find(d.contract_id);
        if (cit == contracts_.end()) continue;
        for (auto& t : cit->second.timers)
            if (t.timer_id == d.timer_id) t.armed = false;
        auto r = invoke(d.contract_id, d.action, kSystemIdentity,
                        json{{"timer_id", d.timer_id}}, now);
        if (r) {
            fired.push_back(r.value());
        } else if (!log_.empty()) {
            fired.push_back(log_.back());  // failed firing, already recorded
        }
    }
    return fired;
}

Result<ContractStatus> Runtime::apply_control(const ControlInstruction& instr) {
    if (!ledger_.is_governance(instr.issuer))
        return {Err::NotGovernance, instr.issuer + " is not governance"};
    auto it = contracts_.find(instr.target);
    if (it == contracts_.end()) return {Err::UnknownContract, instr.target};
    Contract& c = it->second;
    switch (instr.command) {
        case Command::interrupt:
            if (c.status != ContractStatus::Active)
                return {Err::TransitionFailed, "can only interrupt an Active contract"};
            c.status = ContractStatus::Interrupted;
            break;
        case Command::resume:
            if (c.status != ContractStatus::Interrupted)
                return {Err::TransitionFailed, "can only resume an Interrupted contract"};
            c.status = ContractStatus::Active;
            break;
        case Command::terminate: {
            auto r = terminate_contract(instr.target, instr.issuer, instr.tick);
            if (!r) return r.error();
            break;
        }
    }
    auto tx = ledger::Transaction::make(json{{"type", "control"},
                                             {"target", instr.target},
                                             {"command", static_cast<int>(instr.command)},
                                             {"tick", instr.tick}},
                                        instr.issuer, ledger::Ledger::kDefaultChannel,
                                        instr.tick);
    (void)ledger_.submit_transaction(std::move(tx));
    return c.status;
}

Result<TerminationProof> Runtime::terminate_contract(const std::string& contract_id,
                                                     const std::string& caller, Tick now) {
    auto it = contracts_.find(contract_id);
    if (it == contracts_.end()) return {Err::UnknownContract, contract_id};
    Contract& c = it->second;
    if (c.status == ContractStatus::Terminated)
        return {Err::AlreadyTerminated, contract_id};
    if (caller != c.owner && caller != kSystemIdentity && !ledger_.is_governance(caller))
        return {Err::NotAuthorized, caller + " may not terminate"};
    if (c.status == ContractStatus::Installed)
        return {Err::TransitionFailed, "contract never activated"};
    c.state_vars = json::object();
    for (auto& t : c.timers) t.armed = false;
    c.status = ContractStatus::Terminated;

    TerminationProof proof;
    proof.contract_id = contract_id;
    proof.tick = now;
    proof.cleared_state_hash =
        digest_of(json{{"contract_id", contract_id}, {"tick", now}, {"state", json::object()}});
    auto tx = ledger::Transaction::make(json{{"type", "contract-terminate"},
                                             {"contract_id", contract_id},
                                             {"tick", now},
                                             {"proof", proof.cleared_state_hash}},
                                        caller == kSystemIdentity ? c.owner : caller,
                                        c.channel_id, now);
    (void)ledger_.submit_transaction(std::move(tx));
    return proof;
}

Result<std::string> Runtime::store_offchain(const std::string& contract_id,
                                            const std::string& payload) {
    auto it = contracts_.find(contract_id);
    if (it == contracts_.end()) return {Err::UnknownContract, contract_id};
    std::string ref = sha256_hex(payload);
    offchain_[ref] = payload;
    auto tx = ledger::Transaction::make(json{{"type", "offchain-ref"},
                                             {"contract_id", contract_id},
                                             {"ref", ref},
                                             {"size", payload.size()}},
                                        it->second.owner, it->second.channel_id, 0);
    (void)ledger_.submit_transaction(std::move(tx));
    return ref;
}

Result<std::string> Runtime::load_offchain(const std::string& content_ref) const {
    auto it = offchain_.find(content_ref);
    if (it == offchain_.end()) return {Err::NotFound, "no off-chain entry: " + content_ref};
    if (sha256_hex(it->second) != content_ref)
        return {Err::HashMismatch, "off-chain payload does not match its reference"};
    return it->second;
}

const Contract* Runtime::find(const std::string& contract_id) const {
    auto it = contracts_.find(contract_id);
    return it == contracts_.end() ? nullptr : &it->second;
}

std::vector<std::string> Runtime::contract_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : contracts_) out.push_back(id);
    return out;
}

Status Runtime::arm_timer(const std::string& contract_id, Timer t) {
    auto it = contracts_.find(contract_id);
    if (it == contracts_.end()) return {Err::UnknownContract, contract_id};
    Contract& c = it->second;
    if (c.status == ContractStatus::Terminated)
        return {Err::AlreadyTerminated, contract_id};
    if (!c.descriptor.at("functions").contains(t.action))
        return {Err::TransitionFailed, "timer action not a declared function"};
    c.acl[t.action].insert(kSystemIdentity);
    c.timers.push_back(std::move(t));
    return ok_status();
}

Status Runtime::inject_offchain_tamper(const std::string& content_ref) {
    auto it = offchain_.find(content_ref);
    if (it == offchain_.end()) return {Err::NotFound, content_ref};
    it->second += "!";
    return ok_status();
}

}  // namespace pdl::contracts
