#include "pdl/reports.hpp"

#include <filesystem>
#include <fstream>

namespace pdl::reports {

namespace fs = std::filesystem;

std::string ReportStore::append(const std::string& name, const json& body) {
    std::string id = name.empty() ? "report-" + std::to_string(seq_) : name;
    ++seq_;
    reports_[id] = body;
    if (!dir_.empty()) {
        fs::create_directories(dir_);
        std::ofstream out(fs::path(dir_) / (id + ".json"));
        out << body.dump(2) << '\n';
    }
    return id;
}

std::vector<std::string> ReportStore::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : reports_) out.push_back(id);
    return out;
}

std::optional<json> ReportStore::find(const std::string& id) const {
    auto it = reports_.find(id);
    if (it == reports_.end()) return std::nullopt;
    return it->second;
}

Result<std::vector<std::string>> ReportStore::list_directory(const std::string& dir) {
    if (!fs::is_directory(dir)) return {Err::IoError, "no such directory: " + dir};
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

Result<json> ReportStore::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {Err::IoError, "cannot open " + path};
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) return {Err::CorruptLog, "bad report json: " + path};
    return j;
}

}  // namespace pdl::reports
