#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace pdl {

using Tick = std::int64_t;

// Every failure mode surfaced by the public API. Codes are shared across
// modules so callers can switch on one enum.
enum class Err {
    // ledger
    NotMember,
    Blacklisted,
    DuplicateTx,
    NoActiveValidators,
    NotGovernance,
    UnknownMember,
    DuplicateId,
    UnknownNode,
    EmptyWindow,
    // contract runtime
    MalformedDescriptor,
    AlreadyInstalled,
    CommitFailed,
    AccessDenied,
    ContractNotActive,
    CallDepthExceeded,
    ReentrancyDenied,
    TransitionFailed,
    UnknownContract,
    NotAuthorized,
    AlreadyTerminated,
    NotFound,
    HashMismatch,
    // sla core
    MissingMetric,
    WindowOutOfValidity,
    EmptyChain,
    DisjointValidity,
    BrokenPartyChain,
    MetricSetMismatch,
    // intent
    SyntaxError,
    UnknownQuality,
    NoFeasibleOffering,
    SessionClosed,
    MaxRoundsExceeded,
    NoValidBids,
    // lifecycle
    NoAgreement,
    PlanMissing,
    InsufficientCapacity,
    PlanNotReserved,
    GrantExpired,
    NotTerminable,
    NotTerminated,
    MissingEvents,
    // monitoring
    UnknownResource,
    PdlfInactive,
    NoSamples,
    InsufficientFeeds,
    // interop
    UnknownTx,
    TranslationUnsupported,
    Timeout,
    FieldLoss,
    NoHistory,
    // harness
    ScenarioParseError,
    InvariantViolation,
    SchemaMismatch,
    CorruptLog,
    IoError,
};

const char* to_string(Err e);

struct Error {
    Err code;
    std::string message;
};

/// Value-or-error return type used throughout the library.
template <typename T>
class Result {
  public:
    Result(T value) : data_(std::move(value)) {}
    Result(Error err) : data_(std::move(err)) {}
    Result(Err code, std::string msg = {}) : data_(Error{code, std::move(msg)}) {}

    bool ok() const { return std::holds_alternative<T>(data_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& {
        if (!ok()) throw std::runtime_error("Result::value on error: " + error().message);
        return std::get<T>(data_);
    }
    T& value() & {
        if (!ok()) throw std::runtime_error("Result::value on error: " + error().message);
        return std::get<T>(data_);
    }
    T&& take() && {
        if (!ok()) throw std::runtime_error("Result::take on error: " + error().message);
        return std::get<T>(std::move(data_));
    }
    const Error& error() const { return std::get<Error>(data_); }
    Err code() const { return error().code; }

  private:
    std::variant<T, Error> data_;
};

struct Unit {};
using Status = Result<Unit>;

inline Status ok_status() { return Status(Unit{}); }

}  // namespace pdl
