#include "pdl/intent.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>

#include "pdl/hash.hpp"

namespace pdl::intent {

// ----------------------------------------------------------------- presets

PresetTable PresetTable::defaults() {
    PresetTable t;
    auto slo = [](sla::Metric m, double v) { return sla::Slo::make(m, v).value(); };
    t.presets["low-latency"] = {slo(sla::Metric::latency_ms, 20)};
    t.presets["ultra-low-latency"] = {slo(sla::Metric::latency_ms, 5)};
    t.presets["high-availability"] = {slo(sla::Metric::availability_fraction, 0.999)};
    t.presets["reliable"] = {slo(sla::Metric::availability_fraction, 0.99),
                             slo(sla::Metric::packet_loss_fraction, 0.001)};
    t.presets["high-throughput"] = {slo(sla::Metric::throughput_mbps, 1000)};
    t.presets["best-effort"] = {slo(sla::Metric::availability_fraction, 0.9)};
    return t;
}

Result<PresetTable> PresetTable::from_json(const json& j) {
    if (j.value("schema", 0) != 1) return {Err::SchemaMismatch, "preset table schema"};
    PresetTable t;
    try {
        for (const auto& [name, arr] : j.at("presets").items()) {
            std::vector<sla::Slo> slos;
            for (const auto& sj : arr) {
                auto r = sla::Slo::from_json(sj);
                if (!r) return r.error();
                slos.push_back(r.value());
            }
            t.presets[name] = std::move(slos);
        }
        t.per_user_mbps = j.value("per_user_mbps", 0.5);
        t.ticks_per_hour = j.value("ticks_per_hour", 60);
        t.default_duration = j.value("default_duration", 60);
    } catch (const std::exception& e) {
        return {Err::ScenarioParseError, e.what()};
    }
    return t;
}

json PresetTable::to_json() const {
    json p = json::object();
    for (const auto& [name, slos] : presets) {
        json arr = json::array();
        for (const auto& s : slos) arr.push_back(s.to_json());
        p[name] = arr;
    }
    return json{{"schema", 1},
                {"presets", p},
                {"per_user_mbps", per_user_mbps},
                {"ticks_per_hour", ticks_per_hour},
                {"default_duration", default_duration}};
}

// ------------------------------------------------------------------- parser

namespace {

struct Token {
    std::string text;
    std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        out.push_back({text.substr(start, i - start), start});
    }
    return out;
}

bool is_keyword(const std::string& s) {
    return s == "FOR" || s == "WITH" || s == "AT" || s == "FROM" || s == "LASTING";
}

bool is_word(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != ':')
            return false;
    return true;
}

std::optional<long long> parse_int(const std::string& s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

// HH:MM or plain tick count
std::optional<Tick> parse_time(const std::string& s, Tick ticks_per_hour) {
    auto colon = s.find(':');
    if (colon == std::string::npos) return parse_int(s);
    auto h = parse_int(s.substr(0, colon));
    auto m = parse_int(s.substr(colon + 1));
    if (!h || !m || *m < 0 || *m >= 60 || *h < 0 || *h > 23) return std::nullopt;
    return *h * ticks_per_hour + (*m * ticks_per_hour) / 60;
}

// <n>h, <n>m, or plain tick count
std::optional<Tick> parse_duration(const std::string& s, Tick ticks_per_hour) {
    if (s.empty()) return std::nullopt;
    char suffix = s.back();
    if (suffix == 'h' || suffix == 'm') {
        auto n = parse_int(s.substr(0, s.size() - 1));
        if (!n || *n < 0) return std::nullopt;
        return suffix == 'h' ? *n * ticks_per_hour : (*n * ticks_per_hour) / 60;
    }
    auto n = parse_int(s);
    if (!n || *n < 0) return std::nullopt;
    return *n;
}

Error syntax_error(std::size_t pos, std::vector<std::string> expected, ParseDiag* diag) {
    if (diag) {
        diag->position = pos;
        diag->expected = expected;
    }
    std::string msg = "syntax error at position " + std::to_string(pos) + ", expected ";
    for (std::size_t i = 0; i < expected.size(); ++i)
        msg += (i ? " | " : "") + expected[i];
    return {Err::SyntaxError, msg};
}

Result<sla::Slo> parse_inline_slo(const std::string& tok) {
    auto op_pos = tok.find("<=");
    bool le = op_pos != std::string::npos;
    if (!le) op_pos = tok.find(">=");
    if (op_pos == std::string::npos) return {Err::SyntaxError, "no comparator"};
    sla::Metric m;
    try {
        m = sla::metric_from_string(tok.substr(0, op_pos));
    } catch (const std::exception& e) {
        return {Err::SyntaxError, e.what()};
    }
    if ((sla::natural_cmp(m) == sla::Cmp::le) != le)
        return {Err::SyntaxError, "comparator direction inconsistent with metric"};
    char* end = nullptr;
    std::string num = tok.substr(op_pos + 2);
    double v = std::strtod(num.c_str(), &end);
    if (end != num.c_str() + num.size() || num.empty())
        return {Err::SyntaxError, "bad slo target"};
    return sla::Slo::make(m, v);
}

}  // namespace

Result<IntentAst> parse_intent(const std::string& text, const PresetTable& table,
                               ParseDiag* diag) {
    auto toks = tokenize(text);
    if (toks.empty()) return syntax_error(0, {"service"}, diag);

    std::size_t i = 0;
    if (is_keyword(toks[i].text) || !is_word(toks[i].text))
        return syntax_error(toks[i].pos, {"service"}, diag);

    IntentAst ast;
    ast.service_kind = toks[i++].text;
    ast.window_duration = table.default_duration;
    bool saw_window = false;

    while (i < toks.size()) {
        const Token& kw = toks[i];
        if (kw.text == "FOR") {
            if (i + 2 >= toks.size()) return syntax_error(kw.pos, {"FOR <n> <unit>"}, diag);
            auto n = parse_int(toks[i + 1].text);
            if (!n || *n <= 0) return syntax_error(toks[i + 1].pos, {"<n>"}, diag);
            if (!is_word(toks[i + 2].text) || is_keyword(toks[i + 2].text))
                return syntax_error(toks[i + 2].pos, {"<unit>"}, diag);
            ast.scale = {*n, toks[i + 2].text};
            i += 3;
        } else if (kw.text == "WITH") {
            if (i + 1 >= toks.size()) return syntax_error(kw.pos, {"WITH <quality>"}, diag);
            const std::string& q = toks[i + 1].text;
            if (q.find("<=") != std::string::npos || q.find(">=") != std::string::npos) {
                auto slo = parse_inline_slo(q);
                if (!slo) return syntax_error(toks[i + 1].pos, {"<metric><cmp><target>"}, diag);
                ast.explicit_slos.push_back(slo.value());
            } else {
                if (!is_word(q) || is_keyword(q))
                    return syntax_error(toks[i + 1].pos, {"<quality>"}, diag);
                if (!table.presets.count(q)) {
                    if (diag) diag->position = toks[i + 1].pos;
                    return Error{Err::UnknownQuality, "unknown quality: " + q};
                }
                ast.qualities.push_back(q);
            }
            i += 2;
        } else if (kw.text == "AT") {
            if (i + 1 >= toks.size() || !is_word(toks[i + 1].text) ||
                is_keyword(toks[i + 1].text))
                return syntax_error(kw.pos, {"AT <place>"}, diag);
            ast.location = toks[i + 1].text;
            i += 2;
        } else if (kw.text == "FROM") {
            if (i + 3 >= toks.size() || toks[i + 2].text != "LASTING")
                return syntax_error(kw.pos, {"FROM <time> LASTING <dur>"}, diag);
            auto start = parse_time(toks[i + 1].text, table.ticks_per_hour);
            if (!start) return syntax_error(toks[i + 1].pos, {"<time>"}, diag);
            auto dur = parse_duration(toks[i + 3].text, table.ticks_per_hour);
            if (!dur || *dur <= 0) return syntax_error(toks[i + 3].pos, {"<dur>"}, diag);
            ast.window_start = *start;
            ast.window_duration = *dur;
            saw_window = true;
            i += 4;
        } else {
            return syntax_error(kw.pos, {"FOR", "WITH", "AT", "FROM"}, diag);
        }
    }
    (void)saw_window;
    return ast;
}

std::string IntentAst::print() const {
    std::string out = service_kind;
    if (scale) out += " FOR " + std::to_string(scale->first) + " " + scale->second;
    for (const auto& q : qualities) out += " WITH " + q;
    for (const auto& s : explicit_slos) {
        out += " WITH " + std::string(sla::to_string(s.metric)) +
               (s.comparator == sla::Cmp::le ? "<=" : ">=") + json(s.target).dump();
    }
    if (location) out += " AT " + *location;
    out += " FROM " + std::to_string(window_start) + " LASTING " +
           std::to_string(window_duration);
    return out;
}

// --------------------------------------------------------------- translation

Result<TranslationProposal> translate(const IntentAst& ast,
                                      const std::vector<sla::ServiceOffering>& catalogue,
                                      const PresetTable& table) {
    std::map<sla::Metric, sla::Slo> slos;
    for (const auto& q : ast.qualities) {
        auto it = table.presets.find(q);
        if (it == table.presets.end()) return {Err::UnknownQuality, q};
        for (const auto& s : it->second) slos[s.metric] = s;
    }
    for (const auto& s : ast.explicit_slos) slos[s.metric] = s;

    TranslationProposal prop;
    if (ast.scale) {
        double demand = static_cast<double>(ast.scale->first) * table.per_user_mbps;
        auto r = sla::Slo::make(sla::Metric::throughput_mbps, demand);
        if (!r) return r.error();
        slos[sla::Metric::throughput_mbps] = r.value();
        prop.notes.push_back("throughput scaled from " + std::to_string(ast.scale->first) + " " +
                             ast.scale->second);
    }
    if (slos.empty()) return {Err::NoFeasibleOffering, "intent names no constraints"};

    for (const auto& [m, s] : slos) prop.slos.push_back(s);
    auto hits = sla::catalogue_search(catalogue, prop.slos, ast.window_start,
                                      ast.window_start + ast.window_duration);
    if (hits.empty()) return {Err::NoFeasibleOffering, "no offering satisfies the intent"};
    prop.price = hits.front().price;
    prop.offering_id = hits.front().offering_id;
    return prop;
}

// --------------------------------------------------------------- negotiation

NegotiationSession::NegotiationSession(IntentAst ast,
                                       std::vector<sla::ServiceOffering> catalogue,
                                       PresetTable table, std::string customer, int max_rounds)
    : ast_(std::move(ast)),
      catalogue_(std::move(catalogue)),
      table_(std::move(table)),
      customer_(std::move(customer)),
      max_rounds_(max_rounds) {
    auto r = translate(ast_, catalogue_, table_);
    if (r) {
        current_ = std::move(r).take();
    } else {
        open_status_ = r.error();
        closed_ = true;
    }
}

Status NegotiationSession::open_error() const { return open_status_; }

double NegotiationSession::feasibility_bound(sla::Metric m) const {
    bool le = sla::natural_cmp(m) == sla::Cmp::le;
    double bound = le ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
    for (const auto& o : catalogue_) {
        for (const auto& d : o.deliverable) {
            if (d.metric != m) continue;
            bound = le ? std::min(bound, d.target) : std::max(bound, d.target);
        }
    }
    return bound;
}

Result<RefineOutcome> NegotiationSession::refine(const CustomerResponse& response) {
    if (closed_) return {Err::SessionClosed, "negotiation session already closed"};

    RefineOutcome out;
    if (response.accept) {
        AgreedTerms terms;
        terms.slos = current_.slos;
        terms.price = current_.price;
        terms.offering_id = current_.offering_id;
        terms.window_start = ast_.window_start;
        terms.window_duration = ast_.window_duration;
        terms.customer = customer_;
        for (const auto& o : catalogue_)
            if (o.offering_id == current_.offering_id) terms.provider = o.provider;
        closed_ = true;
        out.agreed = std::move(terms);
        return out;
    }

    if (current_.round >= max_rounds_) {
        closed_ = true;
        return {Err::MaxRoundsExceeded, "no agreement within round limit"};
    }

    TranslationProposal next = current_;
    next.round = current_.round + 1;
    for (auto& slo : next.slos) {
        auto ask = response.counters.find(slo.metric);
        if (ask == response.counters.end()) continue;
        double halfway = (slo.target + ask->second) / 2.0;
        double bound = feasibility_bound(slo.metric);
        slo.target = slo.comparator == sla::Cmp::le ? std::max(halfway, bound)
                                                    : std::min(halfway, bound);
    }
    auto hits = sla::catalogue_search(catalogue_, next.slos, ast_.window_start,
                                      ast_.window_start + ast_.window_duration);
    if (!hits.empty()) {
        next.price = hits.front().price;
        next.offering_id = hits.front().offering_id;
    }
    current_ = std::move(next);
    out.next = current_;
    return out;
}

json AgreedTerms::to_json() const {
    json arr = json::array();
    for (const auto& s : slos) arr.push_back(s.to_json());
    return json{{"schema", 1},
                {"slos", arr},
                {"price", price},
                {"offering_id", offering_id},
                {"window_start", window_start},
                {"window_duration", window_duration},
                {"customer", customer},
                {"provider", provider}};
}

std::string AgreedTerms::digest() const { return digest_of(to_json()); }

Result<std::string> record_agreement(contracts::Runtime& runtime, const AgreedTerms& terms,
                                     const std::string& channel_id, const std::string& submitter,
                                     Tick now) {
    json descriptor{{"schema", 1},
                    {"kind", "it-sc"},
                    {"owner", terms.provider},
                    {"state", {{"terms_digest", terms.digest()}, {"terms", terms.to_json()}}},
                    {"functions", {{"get_terms", json::object()}}},
                    {"acl", {{"get_terms", json::array({terms.provider, terms.customer})}}}};
    auto id = runtime.install_contract(descriptor, channel_id, submitter, now);
    if (!id) return id;
    auto act = runtime.activate(id.value(), terms.provider, now);
    if (!act) return act.error();
    return id;
}

// ------------------------------------------------------------------- auction

Result<AuctionResult> run_auction(const std::vector<Bid>& bids, double reserve) {
    const Bid* best = nullptr;
    for (const auto& b : bids) {
        if (b.amount <= 0 || b.amount < reserve) continue;
        if (!best || b.amount > best->amount ||
            (b.amount == best->amount &&
             std::tie(b.tick, b.bidder) < std::tie(best->tick, best->bidder)))
            best = &b;
    }
    if (!best) return {Err::NoValidBids, "no bid meets the reserve"};
    return AuctionResult{best->bidder, best->amount};
}

Status record_auction(ledger::Ledger& ledger, const std::string& gov,
                      const std::string& offering_id, const AuctionResult& result, Tick now) {
    if (!ledger.is_governance(gov)) return {Err::NotGovernance, gov};
    auto tx = ledger::Transaction::make(json{{"type", "governance"},
                                             {"action", "auction-award"},
                                             {"offering_id", offering_id},
                                             {"winner", result.winner},
                                             {"price", result.price}},
                                        gov, ledger::Ledger::kDefaultChannel, now);
    auto r = ledger.submit_transaction(std::move(tx));
    if (!r) return r.error();
    return ok_status();
}

}  // namespace pdl::intent
