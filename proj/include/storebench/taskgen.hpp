#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "storebench/catalog.hpp"
#include "storebench/task.hpp"

namespace storebench {

struct GeneratorConfig {
    std::size_t discovery_limit = 9;
    std::size_t browse_limit = 8;
    std::size_t filter_limit = 9;
    std::uint64_t seed = 0;
    std::vector<std::string> priority_dimensions{"Color", "Size", "Material", "Style"};
    std::vector<std::string> generic_collections = default_generic_collections();
    /// Minimum collection size for browse and filter tasks.
    std::size_t min_collection_size = 3;
};

/// Skill names in emission order.
inline const std::vector<std::string>& skill_order() {
    static const std::vector<std::string> skills{"search-exact", "search-substitute", "browse",
                                                 "filter",       "shipping",          "returns"};
    return skills;
}

/// Two tasks per eligible product (capped at count_limit products).
std::vector<Task> gen_discovery(const ShopBundle& bundle, std::size_t count_limit);

/// Browse and filter tasks over non-generic collections of sufficient size.
std::vector<Task> gen_browse_filter(const ShopBundle& bundle, const GeneratorConfig& config);

/// Shipping and returns lookups, matched against page titles and handles.
std::vector<Task> gen_policy(const ShopBundle& bundle);

/// All deterministic skills, ordered by skill then index.
std::vector<Task> generate_short_tasks(const ShopBundle& bundle, const GeneratorConfig& config = {});

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tags, orders and validates. Throws AssemblyError on duplicate ids or any error-severity issue.
BenchmarkFile assemble_benchmark(const ShopBundle& bundle, std::vector<Task> short_tasks, std::vector<Task> journey_tasks);

/// Replaces tasks by id with hand-authored ones found in `<directory>/*.json`; new ids are appended.
/// A missing directory leaves the list unchanged.
std::vector<Task> apply_overrides(std::vector<Task> tasks, const std::filesystem::path& directory);

/// The skill segment of a "<slug>-<skill>-<n>" id, or "e2e-v1" for journeys; empty when unrecognized.
std::string task_skill(const Task& task, const std::string& shop_slug);

}  // namespace storebench
