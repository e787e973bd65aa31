#include <fstream>
#include <sstream>

#include "pdl/harness.hpp"

namespace pdl::harness {

namespace {

std::string line_of_offset(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return std::to_string(line);
}

}  // namespace

Result<Scenario> Scenario::from_json(const json& j) {
    Scenario sc;
    try {
        if (j.value("schema", 0) != 1)
            return {Err::ScenarioParseError, "unsupported scenario schema"};
        sc.name = j.at("name").get<std::string>();
        sc.seed = j.value("seed", 0ULL);
        sc.duration = j.at("duration").get<Tick>();
        sc.governance = j.at("governance").get<std::string>();
        sc.main_channel = j.value("main_channel", std::string(ledger::Ledger::kDefaultChannel));

        auto parse_ledger = [](const json& lj) {
            LedgerSpec spec;
            spec.id = lj.value("id", std::string("pdl"));
            spec.cfg.min_quorum = lj.value("min_quorum", std::size_t{1});
            spec.cfg.min_active = lj.value("min_active", std::size_t{1});
            spec.cfg.collusion_rate = lj.value("collusion_rate", 0.8);
            spec.cfg.min_votes = lj.value("min_votes", std::size_t{10});
            for (const auto& nj : lj.at("nodes"))
                spec.nodes.push_back({nj.at("id").get<std::string>(),
                                      ledger::role_from_string(nj.value("role", "validator"))});
            for (const auto& cj : lj.value("channels", json::array())) {
                ChannelSpec ch;
                ch.id = cj.at("id").get<std::string>();
                ch.creator = cj.at("creator").get<std::string>();
                for (const auto& m : cj.at("members")) ch.members.insert(m.get<std::string>());
                spec.channels.push_back(std::move(ch));
            }
            return spec;
        };
        sc.ledger = parse_ledger(j.at("ledger"));
        if (j.contains("secondary")) sc.secondary = parse_ledger(j.at("secondary"));

        for (const auto& rj : j.value("resources", json::array()))
            sc.resources.push_back({rj.at("id").get<std::string>(),
                                    rj.at("capacity").get<double>()});

        for (const auto& oj : j.value("catalogue", json::array())) {
            auto o = sla::ServiceOffering::from_json(oj);
            if (!o) return o.error();
            sc.catalogue.push_back(std::move(o).take());
        }

        if (j.contains("presets")) {
            auto p = intent::PresetTable::from_json(j.at("presets"));
            if (!p) return p.error();
            sc.presets = std::move(p).take();
        }

        for (const auto& ij : j.value("intents", json::array())) {
            IntentSpec spec;
            spec.tick = ij.at("tick").get<Tick>();
            spec.customer = ij.at("customer").get<std::string>();
            spec.text = ij.at("text").get<std::string>();
            spec.checkpoint_period = ij.value("checkpoint_period", Tick{10});
            if (ij.contains("penalty")) {
                spec.penalty.units_per_breach = ij.at("penalty").value("units_per_breach", 1.0);
                spec.penalty.cap = ij.at("penalty").value("cap", 100.0);
            }
            for (const auto& rj : ij.value("responses", json::array())) {
                intent::CustomerResponse resp;
                resp.accept = rj.value("accept", false);
                const json counters = rj.value("counters", json::object());
                for (const auto& [m, v] : counters.items())
                    resp.counters[sla::metric_from_string(m)] = v.get<double>();
                spec.responses.push_back(std::move(resp));
            }
            sc.intents.push_back(std::move(spec));
        }

        for (const auto& fj : j.value("faults", json::array()))
            sc.faults.push_back({fj.at("tick").get<Tick>(), fj.at("kind").get<std::string>(),
                                 fj.value("params", json::object())});

        if (j.contains("topology")) {
            const json& tj = j.at("topology");
            for (const auto& pj : tj.at("paths"))
                sc.topology.paths.push_back({pj.at("id").get<std::string>(),
                                             pj.at("capacity").get<double>(),
                                             pj.value("latency_ms", 0.0)});
            sc.topology.current_path = tj.at("current").get<std::string>();
        }

        if (j.contains("oracle")) {
            sc.has_oracle = true;
            for (const auto& f : j.at("oracle").at("feeds"))
                sc.oracle_feeds.push_back(f.get<std::string>());
            sc.oracle_base = j.at("oracle").value("base", 10.0);
        }

        if (j.contains("relay")) {
            auto t = interop::TranslationTable::from_json(j.at("relay").at("table"));
            if (!t) return t.error();
            sc.relay_table = std::move(t).take();
            sc.relay_cfg.max_divergence = j.at("relay").value("max_divergence", Tick{10});
        }
    } catch (const std::exception& e) {
        return {Err::ScenarioParseError, e.what()};
    }
    auto v = sc.validate();
    if (!v) return v.error();
    return sc;
}

Result<Scenario> Scenario::load(const std::string& path) {
    auto text = read_file(path);
    if (!text) return text.error();
    json j = json::parse(text.value(), nullptr, false);
    if (j.is_discarded()) {
        // re-parse with exceptions to recover the byte offset for a line number
        try {
            json strict = json::parse(text.value());
            (void)strict;
        } catch (const json::parse_error& e) {
            return {Err::ScenarioParseError,
                    path + ": line " + line_of_offset(text.value(), e.byte) + ": " + e.what()};
        }
        return {Err::ScenarioParseError, path + ": malformed document"};
    }
    auto sc = from_json(j);
    if (!sc) return {Err::ScenarioParseError, path + ": " + sc.error().message};
    return sc;
}

Status Scenario::validate() const {
    if (name.empty()) return {Err::ScenarioParseError, "scenario name is empty"};
    if (duration <= 0) return {Err::ScenarioParseError, "duration must be positive"};
    if (ledger.nodes.empty()) return {Err::ScenarioParseError, "ledger needs at least one node"};
    bool gov_found = false;
    for (const auto& n : ledger.nodes)
        if (n.id == governance && n.role == ledger::Role::governance) gov_found = true;
    if (!gov_found)
        return {Err::ScenarioParseError, "governance identity is not a governance node"};
    for (const auto& i : intents) {
        if (i.tick < 0 || i.tick >= duration)
            return {Err::ScenarioParseError, "intent tick outside run window"};
        if (i.checkpoint_period <= 0)
            return {Err::ScenarioParseError, "checkpoint_period must be positive"};
    }
    for (const auto& f : faults)
        if (f.tick < 0 || f.tick >= duration)
            return {Err::ScenarioParseError, "fault tick outside run window"};
    if (relay_table && !secondary)
        return {Err::ScenarioParseError, "relay section requires a secondary ledger"};
    if (has_oracle && oracle_feeds.size() < 3)
        return {Err::ScenarioParseError, "oracle needs at least three feeds"};
    return ok_status();
}

// ------------------------------------------------------------------ metrics

json RunMetrics::to_json() const {
    return json{{"schema", kLogSchema},
                {"committed_tx", committed_tx},
                {"rejected_tx", rejected_tx},
                {"violations", violations},
                {"mean_detection_latency", mean_detection_latency},
                {"penalties_accrued", penalties_accrued},
                {"transfers_committed", transfers_committed},
                {"transfers_aborted", transfers_aborted}};
}

RunMetrics RunMetrics::from_json(const json& j) {
    RunMetrics m;
    m.committed_tx = j.value("committed_tx", 0ULL);
    m.rejected_tx = j.value("rejected_tx", 0ULL);
    m.violations = j.value("violations", 0ULL);
    m.mean_detection_latency = j.value("mean_detection_latency", 0.0);
    m.penalties_accrued = j.value("penalties_accrued", 0.0);
    m.transfers_committed = j.value("transfers_committed", 0ULL);
    m.transfers_aborted = j.value("transfers_aborted", 0ULL);
    return m;
}

RunMetrics RunMetrics::from_events(const std::vector<json>& events) {
    RunMetrics m;
    double latency_sum = 0;
    std::uint64_t latency_n = 0;
    for (const auto& e : events) {
        const std::string kind = e.value("kind", "");
        if (kind == "consensus") {
            m.committed_tx += e.value("committed", 0ULL);
            m.rejected_tx += e.value("rejected", 0ULL);
        } else if (kind == "violation" && e.value("severity", "") == "breach") {
            ++m.violations;
            latency_sum += e.value("latency", 0.0);
            ++latency_n;
        } else if (kind == "final-report") {
            m.penalties_accrued += e.value("penalty", 0.0);
        } else if (kind == "transfer-committed") {
            ++m.transfers_committed;
        } else if (kind == "transfer-aborted") {
            ++m.transfers_aborted;
        }
    }
    if (latency_n > 0) m.mean_detection_latency = latency_sum / static_cast<double>(latency_n);
    return m;
}

// ------------------------------------------------------------------- replay

Result<RunMetrics> replay(const std::string& log_text) {
    std::istringstream in(log_text);
    std::string line;
    std::vector<json> lines;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) return {Err::CorruptLog, "unparseable log line"};
        lines.push_back(std::move(j));
    }
    if (lines.size() < 2) return {Err::CorruptLog, "log too short for header and footer"};
    const json& header = lines.front();
    if (header.value("kind", "") != "header")
        return {Err::CorruptLog, "missing header record"};
    if (header.value("schema", 0) != kLogSchema)
        return {Err::SchemaMismatch,
                "log schema " + std::to_string(header.value("schema", 0)) + ", expected " +
                    std::to_string(kLogSchema)};
    const json& footer = lines.back();
    if (footer.value("kind", "") != "footer")
        return {Err::CorruptLog, "missing footer record (truncated log)"};

    std::vector<json> events(lines.begin() + 1, lines.end() - 1);
    if (footer.value("events", std::size_t{0}) != events.size())
        return {Err::CorruptLog, "event count does not match footer"};
    return RunMetrics::from_events(events);
}

// ----------------------------------------------------------------- file IO

Result<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {Err::IoError, "cannot open " + path};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Status write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return {Err::IoError, "cannot write " + path};
    out << content;
    if (!out) return {Err::IoError, "short write to " + path};
    return ok_status();
}

}  // namespace pdl::harness
