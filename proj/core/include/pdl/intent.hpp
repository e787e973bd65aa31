#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pdl/common.hpp"
#include "pdl/contracts.hpp"
#include "pdl/sla.hpp"

namespace pdl::intent {

using nlohmann::json;

/// Quality-word to SLO preset mapping plus translation knobs. Deployment
/// data, loaded from a config document rather than baked into code.
struct PresetTable {
    std::map<std::string, std::vector<sla::Slo>> presets;
    double per_user_mbps = 0.5;
    Tick ticks_per_hour = 60;
    Tick default_duration = 60;

    static PresetTable defaults();
    static Result<PresetTable> from_json(const json& j);
    json to_json() const;
};

struct IntentAst {
    std::string service_kind;
    std::optional<std::pair<long long, std::string>> scale;  // (count, unit)
    std::vector<std::string> qualities;
    std::vector<sla::Slo> explicit_slos;
    Tick window_start = 0;
    Tick window_duration = 0;
    std::optional<std::string> location;

    bool operator==(const IntentAst&) const = default;
    /// Canonical text form; reparsing it yields an identical AST.
    std::string print() const;
};

struct ParseDiag {
    std::size_t position = 0;
    std::vector<std::string> expected;
};

/// Grammar:
///   intent := service clause*
///   clause := FOR <n> <unit> | WITH <quality> | AT <place>
///           | FROM <time> LASTING <dur>
/// <time> is HH:MM or a tick count; <dur> is <n>h, <n>m or a tick count.
/// <quality> is a preset name, or an inline SLO like latency_ms<=20.
Result<IntentAst> parse_intent(const std::string& text, const PresetTable& table,
                               ParseDiag* diag = nullptr);

struct TranslationProposal {
    int round = 1;
    std::vector<sla::Slo> slos;
    double price = 0;
    std::string offering_id;
    std::vector<std::string> notes;
};

Result<TranslationProposal> translate(const IntentAst& ast,
                                      const std::vector<sla::ServiceOffering>& catalogue,
                                      const PresetTable& table);

struct AgreedTerms {
    std::vector<sla::Slo> slos;
    double price = 0;
    std::string offering_id;
    Tick window_start = 0;
    Tick window_duration = 0;
    std::string customer;
    std::string provider;

    json to_json() const;
    std::string digest() const;
};

struct CustomerResponse {
    bool accept = false;
    std::map<sla::Metric, double> counters;  // metric -> asked target
};

struct RefineOutcome {
    std::optional<AgreedTerms> agreed;
    std::optional<TranslationProposal> next;
};

/// Iterative intent-to-terms negotiation. Counter-offers move each countered
/// target halfway toward the ask, clamped to the catalogue's feasibility
/// bound, so every session ends within max_rounds.
class NegotiationSession {
  public:
    NegotiationSession(IntentAst ast, std::vector<sla::ServiceOffering> catalogue,
                       PresetTable table, std::string customer, int max_rounds = 5);

    Status open_error() const;  // non-ok when the initial translation failed
    const TranslationProposal& current() const { return current_; }
    int round() const { return current_.round; }
    bool closed() const { return closed_; }

    Result<RefineOutcome> refine(const CustomerResponse& response);

  private:
    double feasibility_bound(sla::Metric m) const;

    IntentAst ast_;
    std::vector<sla::ServiceOffering> catalogue_;
    PresetTable table_;
    std::string customer_;
    int max_rounds_;
    TranslationProposal current_;
    Status open_status_ = ok_status();
    bool closed_ = false;
};

/// Installs and activates an IT-SC holding the canonical terms digest.
Result<std::string> record_agreement(contracts::Runtime& runtime, const AgreedTerms& terms,
                                     const std::string& channel_id, const std::string& submitter,
                                     Tick now);

struct Bid {
    std::string bidder;
    std::string offering_id;
    double amount = 0;
    Tick tick = 0;
};

struct AuctionResult {
    std::string winner;
    double price = 0;
};

/// Sealed first-price: highest amount at or above reserve wins; ties go to
/// the earliest bid, then the lexically smaller bidder id.
Result<AuctionResult> run_auction(const std::vector<Bid>& bids, double reserve);

/// Records an auction outcome as a governance transaction.
Status record_auction(ledger::Ledger& ledger, const std::string& gov,
                      const std::string& offering_id, const AuctionResult& result, Tick now);

}  // namespace pdl::intent
