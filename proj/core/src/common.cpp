#include "pdl/common.hpp"

namespace pdl {

const char* to_string(Err e) {
    switch (e) {
        case Err::NotMember: return "NotMember";
        case Err::Blacklisted: return "Blacklisted";
        case Err::DuplicateTx: return "DuplicateTx";
        case Err::NoActiveValidators: return "NoActiveValidators";
        case Err::NotGovernance: return "NotGovernance";
        case Err::UnknownMember: return "UnknownMember";
        case Err::DuplicateId: return "DuplicateId";
        case Err::UnknownNode: return "UnknownNode";
        case Err::EmptyWindow: return "EmptyWindow";
        case Err::MalformedDescriptor: return "MalformedDescriptor";
        case Err::AlreadyInstalled: return "AlreadyInstalled";
        case Err::CommitFailed: return "CommitFailed";
        case Err::AccessDenied: return "AccessDenied";
        case Err::ContractNotActive: return "ContractNotActive";
        case Err::CallDepthExceeded: return "CallDepthExceeded";
        case Err::ReentrancyDenied: return "ReentrancyDenied";
        case Err::TransitionFailed: return "TransitionFailed";
        case Err::UnknownContract: return "UnknownContract";
        case Err::NotAuthorized: return "NotAuthorized";
        case Err::AlreadyTerminated: return "AlreadyTerminated";
        case Err::NotFound: return "NotFound";
        case Err::HashMismatch: return "HashMismatch";
        case Err::MissingMetric: return "MissingMetric";
        case Err::WindowOutOfValidity: return "WindowOutOfValidity";
        case Err::EmptyChain: return "EmptyChain";
        case Err::DisjointValidity: return "DisjointValidity";
        case Err::BrokenPartyChain: return "BrokenPartyChain";
        case Err::MetricSetMismatch: return "MetricSetMismatch";
        case Err::SyntaxError: return "SyntaxError";
        case Err::UnknownQuality: return "UnknownQuality";
        case Err::NoFeasibleOffering: return "NoFeasibleOffering";
        case Err::SessionClosed: return "SessionClosed";
        case Err::MaxRoundsExceeded: return "MaxRoundsExceeded";
        case Err::NoValidBids: return "NoValidBids";
        case Err::NoAgreement: return "NoAgreement";
        case Err::PlanMissing: return "PlanMissing";
        case Err::InsufficientCapacity: return "InsufficientCapacity";
        case Err::PlanNotReserved: return "PlanNotReserved";
        case Err::GrantExpired: return "GrantExpired";
        case Err::NotTerminable: return "NotTerminable";
        case Err::NotTerminated: return "NotTerminated";
        case Err::MissingEvents: return "MissingEvents";
        case Err::UnknownResource: return "UnknownResource";
        case Err::PdlfInactive: return "PdlfInactive";
        case Err::NoSamples: return "NoSamples";
        case Err::InsufficientFeeds: return "InsufficientFeeds";
        case Err::UnknownTx: return "UnknownTx";
        case Err::TranslationUnsupported: return "TranslationUnsupported";
        case Err::Timeout: return "Timeout";
        case Err::FieldLoss: return "FieldLoss";
        case Err::NoHistory: return "NoHistory";
        case Err::ScenarioParseError: return "ScenarioParseError";
        case Err::InvariantViolation: return "InvariantViolation";
        case Err::SchemaMismatch: return "SchemaMismatch";
        case Err::CorruptLog: return "CorruptLog";
        case Err::IoError: return "IoError";
    }
    return "?";
}

}  // namespace pdl
