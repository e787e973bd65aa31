#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdl/common.hpp"

namespace pdl::sla {

using nlohmann::json;

enum class Metric { latency_ms, availability_fraction, throughput_mbps, packet_loss_fraction };
enum class Cmp { le, ge };
enum class Layer { vertical, horizontal };

const char* to_string(Metric m);
Metric metric_from_string(const std::string& s);
/// Comparator direction a metric must use (latency/loss: le, the rest: ge).
Cmp natural_cmp(Metric m);

struct Slo {
    Metric metric = Metric::latency_ms;
    Cmp comparator = Cmp::le;
    double target = 0;

    static Result<Slo> make(Metric m, double target);
    bool operator==(const Slo&) const = default;
    /// Inclusive comparison: boundary counts as met.
    bool met_by(double value) const {
        return comparator == Cmp::le ? value <= target : value >= target;
    }
    json to_json() const;
    static Result<Slo> from_json(const json& j);
};

struct PenaltyRule {
    double units_per_breach = 0;
    double cap = 0;

    double accrued(std::size_t breaches) const {
        double p = units_per_breach * static_cast<double>(breaches);
        return p > cap ? cap : p;
    }
};

struct Sla {
    std::string sla_id;
    std::string provider;
    std::string customer;
    std::vector<Slo> slos;
    Tick start = 0;
    Tick end = 0;
    Tick checkpoint_period = 0;
    PenaltyRule penalty;
    Layer layer = Layer::horizontal;
    std::vector<std::string> parents;

    Status validate() const;
    const Slo* find(Metric m) const;
    json to_json() const;
    static Result<Sla> from_json(const json& j);
};

struct ServiceOffering {
    std::string offering_id;
    std::vector<std::string> tags;
    std::vector<Slo> deliverable;
    double price = 0;
    double capacity = 0;
    std::string provider;

    json to_json() const;
    static Result<ServiceOffering> from_json(const json& j);
};

struct ComplianceResult {
    Tick window_start = 0;
    Tick window_end = 0;
    std::map<Metric, bool> verdicts;
    std::size_t breach_count = 0;
    double accrued_penalty = 0;
};

/// Per-metric aggregate for an evaluation window (mean for latency, loss and
/// throughput; fraction of up ticks for availability).
using Measurements = std::map<Metric, double>;

Result<ComplianceResult> evaluate(const Sla& sla, const Measurements& measured,
                                  Tick window_start, Tick window_end);

/// End-to-end chaining: latency sums, availability multiplies, throughput
/// takes the min, loss composes as 1 - prod(1 - loss_k).
Result<Sla> compose_serial(const std::vector<Sla>& chain);

/// Coverage-time weighted blend of two SLAs over the same metric set.
Result<Sla> compose_weighted(const Sla& npn, const Sla& plmn, double weight_npn);

bool offering_satisfies(const ServiceOffering& o, const std::vector<Slo>& requirements);

std::vector<ServiceOffering> catalogue_search(const std::vector<ServiceOffering>& catalogue,
                                              const std::vector<Slo>& requirements,
                                              Tick window_start, Tick window_end);

}  // namespace pdl::sla
