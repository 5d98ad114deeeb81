#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "storebench/catalog.hpp"
#include "storebench/task.hpp"

namespace storebench {

enum class Rule {
    unknown_collection,
    unknown_product,
    infeasible_filter,
    intent_answer_leak,
    option_mismatch,
    product_not_in_collection,
    unknown_page,
};

inline constexpr Rule kAllRules[] = {Rule::unknown_collection,   Rule::unknown_product,
                                     Rule::infeasible_filter,    Rule::intent_answer_leak,
                                     Rule::option_mismatch,      Rule::product_not_in_collection,
                                     Rule::unknown_page};

enum class Severity { error, warning };

std::string_view rule_name(Rule rule);
std::optional<Rule> parse_rule(std::string_view name);
Severity rule_severity(Rule rule);
std::string_view severity_name(Severity severity);

struct Issue {
    Rule rule;
    Severity severity;
    std::string task_id;
    std::string message;
    /// Offending handle, facet or leaked string.
    nlohmann::json evidence;

    bool operator==(const Issue&) const = default;
};

void to_json(nlohmann::json& j, const Issue& issue);
Issue issue_from_json(const nlohmann::json& j);

/// Runs every rule over every task. Pure; never throws for grounding problems.
std::vector<Issue> validate(const std::vector<Task>& tasks, const ShopBundle& bundle);

/// Errors plus the option-mismatch and product-not-in-collection warnings.
std::vector<Issue> actionable_subset(const std::vector<Issue>& issues);

struct Disposition {
    int code = 0;
    std::string report;
};

/// Exit code 2 when any error is present; the report groups by task then rule.
Disposition exit_disposition(const std::vector<Issue>& issues);

/// The facet a task asks for: the structured field, else parsed from the intent.
std::optional<Facet> task_facet(const Task& task);

/// Handle named by the first "/<kind>/<handle>" segment in a URL hint.
std::optional<std::string> handle_in_hint(std::string_view hint, std::string_view kind);

}  // namespace storebench
