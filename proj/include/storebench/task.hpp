#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "storebench/catalog.hpp"

namespace storebench {

class TaskSchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TaskType { shopping, navigation };
enum class BundleTag { easy_short_horizon, hard_long_horizon };

std::string_view task_type_name(TaskType type);
std::string_view bundle_tag_name(BundleTag tag);

struct SuccessCriteria {
    std::optional<std::string> url_contains;
    /// Free descriptor ("navigation", "cart_exact", "page_navigation", ...).
    std::string type;
    std::optional<std::vector<std::string>> response_contains;
    /// Unrecognized keys, kept so documents round-trip.
    nlohmann::json extra = nlohmann::json::object();

    bool operator==(const SuccessCriteria&) const = default;
};

struct Task {
    std::string id;
    TaskType type = TaskType::shopping;
    std::string intent;
    SuccessCriteria success_criteria;
    std::optional<std::vector<std::string>> url_contains_alt;
    std::optional<BundleTag> bundle_tag;
    /// Structured facet for filter tasks.
    std::optional<Facet> facet;
    nlohmann::json extra = nlohmann::json::object();

    /// url_contains followed by url_contains_alt entries.
    std::vector<std::string> url_hints() const;
    bool operator==(const Task&) const = default;
};

void to_json(nlohmann::json& j, const Task& task);
Task task_from_json(const nlohmann::json& j);

struct BenchmarkFile {
    std::string shop_slug;
    std::vector<Task> tasks;
    std::vector<std::string> easy_short_horizon;
    std::vector<std::string> hard_long_horizon;

    const Task* find(std::string_view id) const;
    bool operator==(const BenchmarkFile&) const = default;
};

void to_json(nlohmann::json& j, const BenchmarkFile& file);
BenchmarkFile benchmark_from_json(const nlohmann::json& j);

/// JSON parse that tolerates trailing commas before '}' or ']'.
nlohmann::json parse_json_lenient(std::string_view text);

/// Reads tasks from a benchmark file, a {"tasks": [...]} object, a bare array or a single task.
std::vector<Task> tasks_from_document(const nlohmann::json& document);

BenchmarkFile load_benchmark(const std::string& path);
void save_benchmark(const BenchmarkFile& file, const std::string& path);

}  // namespace storebench
