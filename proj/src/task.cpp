#include "storebench/task.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace storebench {

using nlohmann::json;

std::string_view task_type_name(TaskType type) { return type == TaskType::shopping ? "shopping" : "navigation"; }

std::string_view bundle_tag_name(BundleTag tag) {
    return tag == BundleTag::easy_short_horizon ? "easy_short_horizon" : "hard_long_horizon";
}

std::vector<std::string> Task::url_hints() const {
    std::vector<std::string> out;
    if (success_criteria.url_contains) out.push_back(*success_criteria.url_contains);
    if (url_contains_alt) out.insert(out.end(), url_contains_alt->begin(), url_contains_alt->end());
    return out;
}

namespace {

std::string require_string(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw TaskSchemaError(where + ": missing \"" + key + "\"");
    if (!j[key].is_string()) throw TaskSchemaError(where + ": \"" + key + "\" must be a string");
    return j[key].get<std::string>();
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw TaskSchemaError(where + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) throw TaskSchemaError(where + " must be an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

void check_path_hint(const std::string& hint, const std::string& where) {
    if (hint.empty() || hint.front() != '/') throw TaskSchemaError(where + " must be a path beginning with '/'");
}

}  // namespace

void to_json(json& j, const Task& task) {
    j = json::object();
    j["id"] = task.id;
    j["type"] = task_type_name(task.type);
    j["intent"] = task.intent;
    json criteria = task.success_criteria.extra;
    if (task.success_criteria.url_contains) criteria["url_contains"] = *task.success_criteria.url_contains;
    criteria["type"] = task.success_criteria.type;
    if (task.success_criteria.response_contains) criteria["response_contains"] = *task.success_criteria.response_contains;
    j["success_criteria"] = std::move(criteria);
    if (task.url_contains_alt) j["url_contains_alt"] = *task.url_contains_alt;
    if (task.bundle_tag) j["bundle_tag"] = bundle_tag_name(*task.bundle_tag);
    if (task.facet) j["facet"] = json{{"dimension", task.facet->dimension}, {"value", task.facet->value}};
    for (const auto& [key, value] : task.extra.items()) j[key] = value;
}

Task task_from_json(const json& j) {
    if (!j.is_object()) throw TaskSchemaError("task must be a JSON object");
    Task task;
    task.id = require_string(j, "id", "task");
    const std::string where = "task " + task.id;
    if (task.id.empty()) throw TaskSchemaError("task id must not be empty");
    const std::string type = require_string(j, "type", where);
    if (type == "shopping") {
        task.type = TaskType::shopping;
    } else if (type == "navigation") {
        task.type = TaskType::navigation;
    } else {
        throw TaskSchemaError(where + ": type must be \"shopping\" or \"navigation\"");
    }
    task.intent = require_string(j, "intent", where);
    if (!j.contains("success_criteria") || !j["success_criteria"].is_object()) {
        throw TaskSchemaError(where + ": success_criteria must be an object");
    }
    const json& criteria = j["success_criteria"];
    task.success_criteria.type = require_string(criteria, "type", where + " success_criteria");
    if (criteria.contains("url_contains")) {
        task.success_criteria.url_contains = require_string(criteria, "url_contains", where + " success_criteria");
        check_path_hint(*task.success_criteria.url_contains, where + " url_contains");
    }
    if (criteria.contains("response_contains")) {
        task.success_criteria.response_contains = string_list(criteria["response_contains"], where + " response_contains");
    }
    for (const auto& [key, value] : criteria.items()) {
        if (key != "type" && key != "url_contains" && key != "response_contains") task.success_criteria.extra[key] = value;
    }
    if (j.contains("url_contains_alt")) {
        task.url_contains_alt = string_list(j["url_contains_alt"], where + " url_contains_alt");
        for (const auto& hint : *task.url_contains_alt) check_path_hint(hint, where + " url_contains_alt entry");
    }
    if (j.contains("bundle_tag")) {
        const std::string tag = require_string(j, "bundle_tag", where);
        if (tag == "easy_short_horizon") {
            task.bundle_tag = BundleTag::easy_short_horizon;
        } else if (tag == "hard_long_horizon") {
            task.bundle_tag = BundleTag::hard_long_horizon;
        } else {
            throw TaskSchemaError(where + ": unknown bundle_tag \"" + tag + "\"");
        }
    }
    if (j.contains("facet")) {
        const json& facet = j["facet"];
        if (!facet.is_object()) throw TaskSchemaError(where + ": facet must be an object");
        task.facet = Facet{require_string(facet, "dimension", where + " facet"), require_string(facet, "value", where + " facet")};
    }
    static const std::set<std::string> known{"id",   "type",         "intent", "success_criteria", "url_contains_alt",
                                             "bundle_tag", "facet"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) task.extra[key] = value;
    }
    return task;
}

const Task* BenchmarkFile::find(std::string_view id) const {
    for (const auto& task : tasks) {
        if (task.id == id) return &task;
    }
    return nullptr;
}

void to_json(json& j, const BenchmarkFile& file) {
    j = json{{"shop_slug", file.shop_slug},
             {"tasks", file.tasks},
             {"bundles", {{"easy_short_horizon", file.easy_short_horizon}, {"hard_long_horizon", file.hard_long_horizon}}}};
}

BenchmarkFile benchmark_from_json(const json& j) {
    if (!j.is_object()) throw TaskSchemaError("benchmark file must be a JSON object");
    BenchmarkFile file;
    file.shop_slug = require_string(j, "shop_slug", "benchmark file");
    if (!j.contains("tasks") || !j["tasks"].is_array()) throw TaskSchemaError("benchmark file: tasks must be an array");
    for (const auto& item : j["tasks"]) file.tasks.push_back(task_from_json(item));
    if (j.contains("bundles")) {
        const json& bundles = j["bundles"];
        if (!bundles.is_object()) throw TaskSchemaError("benchmark file: bundles must be an object");
        if (bundles.contains("easy_short_horizon")) {
            file.easy_short_horizon = string_list(bundles["easy_short_horizon"], "bundles.easy_short_horizon");
        }
        if (bundles.contains("hard_long_horizon")) {
            file.hard_long_horizon = string_list(bundles["hard_long_horizon"], "bundles.hard_long_horizon");
        }
    }
    std::set<std::string> ids;
    for (const auto& task : file.tasks) {
        if (!ids.insert(task.id).second) throw TaskSchemaError("benchmark file: duplicate task id " + task.id);
    }
    std::set<std::string> tagged;
    for (const auto* list : {&file.easy_short_horizon, &file.hard_long_horizon}) {
        for (const auto& id : *list) {
            if (!ids.count(id)) throw TaskSchemaError("benchmark file: bundle lists unknown task id " + id);
            if (!tagged.insert(id).second) throw TaskSchemaError("benchmark file: task " + id + " is in both bundles");
        }
    }
    if (tagged.size() != ids.size() && j.contains("bundles")) {
        throw TaskSchemaError("benchmark file: bundles must partition the task ids");
    }
    return file;
}

json parse_json_lenient(std::string_view text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            cleaned += c;
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
            cleaned += c;
            continue;
        }
        if (c == ',') {
            std::size_t k = i + 1;
            while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
            if (k < text.size() && (text[k] == '}' || text[k] == ']')) continue;
        }
        cleaned += c;
    }
    return json::parse(cleaned);
}

std::vector<Task> tasks_from_document(const json& document) {
    std::vector<Task> tasks;
    if (document.is_array()) {
        for (const auto& item : document) tasks.push_back(task_from_json(item));
    } else if (document.is_object() && document.contains("tasks")) {
        if (!document["tasks"].is_array()) throw TaskSchemaError("\"tasks\" must be an array");
        for (const auto& item : document["tasks"]) tasks.push_back(task_from_json(item));
    } else {
        tasks.push_back(task_from_json(document));
    }
    return tasks;
}

BenchmarkFile load_benchmark(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json document;
    try {
        document = parse_json_lenient(buffer.str());
    } catch (const json::parse_error& err) {
        throw TaskSchemaError(path + ": " + err.what());
    }
    return benchmark_from_json(document);
}

void save_benchmark(const BenchmarkFile& file, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << json(file).dump(2) << "\n";
}

}  // namespace storebench
