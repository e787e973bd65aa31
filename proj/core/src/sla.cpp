#include "pdl/sla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "pdl/hash.hpp"

namespace pdl::sla {

const char* to_string(Metric m) {
    switch (m) {
        case Metric::latency_ms: return "latency_ms";
        case Metric::availability_fraction: return "availability_fraction";
        case Metric::throughput_mbps: return "throughput_mbps";
        case Metric::packet_loss_fraction: return "packet_loss_fraction";
    }
    return "?";
}

Metric metric_from_string(const std::string& s) {
    if (s == "latency_ms") return Metric::latency_ms;
    if (s == "availability_fraction") return Metric::availability_fraction;
    if (s == "throughput_mbps") return Metric::throughput_mbps;
    if (s == "packet_loss_fraction") return Metric::packet_loss_fraction;
    throw std::invalid_argument("unknown metric: " + s);
}

Cmp natural_cmp(Metric m) {
    return (m == Metric::latency_ms || m == Metric::packet_loss_fraction) ? Cmp::le : Cmp::ge;
}

Result<Slo> Slo::make(Metric m, double target) {
    if (!std::isfinite(target))
        return {Err::MalformedDescriptor, "non-finite slo target"};
    switch (m) {
        case Metric::availability_fraction:
        case Metric::packet_loss_fraction:
            if (target < 0 || target > 1)
                return {Err::MalformedDescriptor,
                        std::string(to_string(m)) + " target must be in [0,1]"};
            break;
        case Metric::latency_ms:
        case Metric::throughput_mbps:
            if (target <= 0)
                return {Err::MalformedDescriptor,
                        std::string(to_string(m)) + " target must be positive"};
            break;
    }
    return Slo{m, natural_cmp(m), target};
}

json Slo::to_json() const {
    return json{{"metric", to_string(metric)},
                {"cmp", comparator == Cmp::le ? "le" : "ge"},
                {"target", target}};
}

Result<Slo> Slo::from_json(const json& j) {
    Metric m;
    try {
        m = metric_from_string(j.at("metric").get<std::string>());
    } catch (const std::exception& e) {
        return {Err::MalformedDescriptor, e.what()};
    }
    auto r = make(m, j.at("target").get<double>());
    if (!r) return r;
    std::string cmp = j.value("cmp", r.value().comparator == Cmp::le ? "le" : "ge");
    if ((cmp == "le") != (r.value().comparator == Cmp::le))
        return {Err::MalformedDescriptor, "comparator direction inconsistent with metric"};
    return r;
}

Status Sla::validate() const {
    if (start >= end) return {Err::MalformedDescriptor, "sla validity start must precede end"};
    if (slos.empty()) return {Err::MalformedDescriptor, "sla needs at least one slo"};
    if (checkpoint_period <= 0 || (end - start) % checkpoint_period != 0)
        return {Err::MalformedDescriptor, "checkpoint_period must divide the validity window"};
    std::set<Metric> seen;
    for (const auto& s : slos) {
        if (!seen.insert(s.metric).second)
            return {Err::MalformedDescriptor,
                    std::string("duplicate slo metric: ") + to_string(s.metric)};
        if (s.comparator != natural_cmp(s.metric))
            return {Err::MalformedDescriptor, "comparator direction inconsistent with metric"};
    }
    return ok_status();
}

const Slo* Sla::find(Metric m) const {
    for (const auto& s : slos)
        if (s.metric == m) return &s;
    return nullptr;
}

json Sla::to_json() const {
    json slo_arr = json::array();
    for (const auto& s : slos) slo_arr.push_back(s.to_json());
    json parent_arr = json::array();
    for (const auto& p : parents) parent_arr.push_back(p);
    return json{{"schema", 1},
                {"sla_id", sla_id},
                {"provider", provider},
                {"customer", customer},
                {"slos", slo_arr},
                {"start", start},
                {"end", end},
                {"checkpoint_period", checkpoint_period},
                {"penalty", {{"units_per_breach", penalty.units_per_breach}, {"cap", penalty.cap}}},
                {"layer", layer == Layer::horizontal ? "horizontal" : "vertical"},
                {"parents", parent_arr}};
}

Result<Sla> Sla::from_json(const json& j) {
    Sla s;
    try {
        s.sla_id = j.at("sla_id").get<std::string>();
        s.provider = j.at("provider").get<std::string>();
        s.customer = j.at("customer").get<std::string>();
        for (const auto& sj : j.at("slos")) {
            auto r = Slo::from_json(sj);
            if (!r) return r.error();
            s.slos.push_back(r.value());
        }
        s.start = j.at("start").get<Tick>();
        s.end = j.at("end").get<Tick>();
        s.checkpoint_period = j.at("checkpoint_period").get<Tick>();
        s.penalty.units_per_breach = j.at("penalty").at("units_per_breach").get<double>();
        s.penalty.cap = j.at("penalty").at("cap").get<double>();
        s.layer = j.value("layer", "horizontal") == "vertical" ? Layer::vertical
                                                              : Layer::horizontal;
        for (const auto& p : j.value("parents", json::array()))
            s.parents.push_back(p.get<std::string>());
    } catch (const std::exception& e) {
        return {Err::MalformedDescriptor, e.what()};
    }
    auto v = s.validate();
    if (!v) return v.error();
    return s;
}

json ServiceOffering::to_json() const {
    json d = json::array();
    for (const auto& s : deliverable) d.push_back(s.to_json());
    json t = json::array();
    for (const auto& tag : tags) t.push_back(tag);
    return json{{"offering_id", offering_id}, {"tags", t},       {"deliverable", d},
                {"price", price},             {"capacity", capacity}, {"provider", provider}};
}

Result<ServiceOffering> ServiceOffering::from_json(const json& j) {
    ServiceOffering o;
    try {
        o.offering_id = j.at("offering_id").get<std::string>();
        for (const auto& t : j.value("tags", json::array())) o.tags.push_back(t.get<std::string>());
        for (const auto& sj : j.at("deliverable")) {
            auto r = Slo::from_json(sj);
            if (!r) return r.error();
            o.deliverable.push_back(r.value());
        }
        o.price = j.at("price").get<double>();
        o.capacity = j.at("capacity").get<double>();
        o.provider = j.value("provider", "");
    } catch (const std::exception& e) {
        return {Err::MalformedDescriptor, e.what()};
    }
    return o;
}

Result<ComplianceResult> evaluate(const Sla& sla, const Measurements& measured,
                                  Tick window_start, Tick window_end) {
    if (window_start < sla.start || window_end > sla.end)
        return {Err::WindowOutOfValidity, "evaluation window outside sla validity"};
    ComplianceResult res;
    res.window_start = window_start;
    res.window_end = window_end;
    for (const auto& slo : sla.slos) {
        auto it = measured.find(slo.metric);
        if (it == measured.end())
            return {Err::MissingMetric, std::string("no aggregate for ") + to_string(slo.metric)};
        bool met = slo.met_by(it->second);
        res.verdicts[slo.metric] = met;
        if (!met) ++res.breach_count;
    }
    res.accrued_penalty = sla.penalty.accrued(res.breach_count);
    return res;
}

Result<Sla> compose_serial(const std::vector<Sla>& chain) {
    if (chain.empty()) return {Err::EmptyChain, "empty composition chain"};

    Tick start = chain.front().start, end = chain.front().end;
    for (const auto& s : chain) {
        start = std::max(start, s.start);
        end = std::min(end, s.end);
    }
    if (start >= end) return {Err::DisjointValidity, "validity windows do not intersect"};

    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        if (chain[k].layer == Layer::horizontal && chain[k + 1].layer == Layer::horizontal &&
            chain[k].provider != chain[k + 1].customer)
            return {Err::BrokenPartyChain,
                    "provider of link " + std::to_string(k) + " does not match next customer"};
    }

    double latency = 0, availability = 1, loss_pass = 1;
    double throughput = std::numeric_limits<double>::infinity();
    bool has_latency = false, has_avail = false, has_tp = false, has_loss = false;
    PenaltyRule penalty;
    for (const auto& s : chain) {
        if (const Slo* x = s.find(Metric::latency_ms)) {
            latency += x->target;
            has_latency = true;
        }
        if (const Slo* x = s.find(Metric::availability_fraction)) {
            availability *= x->target;
            has_avail = true;
        }
        if (const Slo* x = s.find(Metric::throughput_mbps)) {
            throughput = std::min(throughput, x->target);
            has_tp = true;
        }
        if (const Slo* x = s.find(Metric::packet_loss_fraction)) {
            loss_pass *= 1.0 - x->target;
            has_loss = true;
        }
        penalty.units_per_breach += s.penalty.units_per_breach;
        penalty.cap += s.penalty.cap;
    }

    Sla out;
    out.provider = chain.back().provider;
    out.customer = chain.front().customer;
    if (has_latency) out.slos.push_back({Metric::latency_ms, Cmp::le, latency});
    if (has_avail) out.slos.push_back({Metric::availability_fraction, Cmp::ge, availability});
    if (has_tp) out.slos.push_back({Metric::throughput_mbps, Cmp::ge, throughput});
    if (has_loss) out.slos.push_back({Metric::packet_loss_fraction, Cmp::le, 1.0 - loss_pass});
    out.start = start;
    out.end = end;
    Tick span = end - start;
    out.checkpoint_period = (span % chain.front().checkpoint_period == 0)
                                ? chain.front().checkpoint_period
                                : span;
    out.penalty = penalty;
    out.layer = chain.front().layer;
    for (const auto& s : chain) out.parents.push_back(s.sla_id);
    out.sla_id = digest_of(out.to_json()).substr(0, 16);
    return out;
}

Result<Sla> compose_weighted(const Sla& npn, const Sla& plmn, double weight_npn) {
    std::set<Metric> a, b;
    for (const auto& s : npn.slos) a.insert(s.metric);
    for (const auto& s : plmn.slos) b.insert(s.metric);
    if (a != b) return {Err::MetricSetMismatch, "slas cover different metric sets"};
    if (weight_npn < 0 || weight_npn > 1)
        return {Err::MalformedDescriptor, "weight must be in [0,1]"};

    Sla out;
    out.provider = npn.provider;
    out.customer = npn.customer;
    for (const auto& s : npn.slos) {
        const Slo* other = plmn.find(s.metric);
        double t = weight_npn * s.target + (1.0 - weight_npn) * other->target;
        out.slos.push_back({s.metric, s.comparator, t});
    }
    out.start = npn.start;
    out.end = npn.end;
    out.checkpoint_period = npn.checkpoint_period;
    out.penalty = npn.penalty.units_per_breach >= plmn.penalty.units_per_breach ? npn.penalty
                                                                                : plmn.penalty;
    out.layer = npn.layer;
    out.parents = {npn.sla_id, plmn.sla_id};
    out.sla_id = digest_of(out.to_json()).substr(0, 16);
    return out;
}

bool offering_satisfies(const ServiceOffering& o, const std::vector<Slo>& requirements) {
    for (const auto& req : requirements) {
        const Slo* bound = nullptr;
        for (const auto& d : o.deliverable)
            if (d.metric == req.metric) bound = &d;
        if (!bound) return false;
        // the offering's deliverable bound must be at least as strict
        if (req.comparator == Cmp::le ? bound->target > req.target
                                      : bound->target < req.target)
            return false;
    }
    return true;
}

std::vector<ServiceOffering> catalogue_search(const std::vector<ServiceOffering>& catalogue,
                                              const std::vector<Slo>& requirements, Tick,
                                              Tick) {
    std::vector<ServiceOffering> out;
    for (const auto& o : catalogue)
        if (o.capacity > 0 && offering_satisfies(o, requirements)) out.push_back(o);
    std::sort(out.begin(), out.end(), [](const ServiceOffering& x, const ServiceOffering& y) {
        if (x.price != y.price) return x.price < y.price;
        return x.offering_id < y.offering_id;
    });
    return out;
}

}  // namespace pdl::sla
