#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdl/common.hpp"

namespace pdl::reports {

using nlohmann::json;

/// Append-only governance report store. Reports live in memory and, when a
/// directory is attached, one structured-text file per report.
class ReportStore {
  public:
    ReportStore() = default;
    explicit ReportStore(std::string directory) : dir_(std::move(directory)) {}

    /// Appends a report; returns its id (the name, or a sequence-based id).
    std::string append(const std::string& name, const json& body);

    std::vector<std::string> ids() const;
    std::optional<json> find(const std::string& id) const;
    std::size_t size() const { return reports_.size(); }

    static Result<std::vector<std::string>> list_directory(const std::string& dir);
    static Result<json> load_file(const std::string& path);

  private:
    std::string dir_;
    std::map<std::string, json> reports_;
    std::size_t seq_ = 0;
};

}  // namespace pdl::reports
