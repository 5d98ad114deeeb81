#include <doctest.h>

#include <algorithm>
#include <map>

#include "corpus.hpp"
#include "storebench/fixtures.hpp"
#include "storebench/task.hpp"
#include "storebench/taskgen.hpp"
#include "storebench/validator.hpp"
#include "support.hpp"

using namespace storebench;
using nlohmann::json;
namespace t = storebench::testing;

TEST_CASE("task listings round-trip field-identically") {
    for (const char* name : {"filter_task.json", "policy_task.json", "journey_task.json", "detour_task.json"}) {
        CAPTURE(name);
        const json original = parse_json_lenient(t::slurp(t::data_dir() / name));
        const Task task = task_from_json(original);
        CHECK(json(task) == original);
        CHECK(task_from_json(json(task)) == task);
    }
}

TEST_CASE("listing fields are read into the task model") {
    const Task policy = task_from_json(parse_json_lenient(t::slurp(t::data_dir() / "policy_task.json")));
    CHECK(policy.type == TaskType::navigation);
    CHECK(policy.success_criteria.type == "page_navigation");
    CHECK(policy.url_hints() == std::vector<std::string>{"/policies/refund-policy", "/pages/return-policy"});

    const Task filter = task_from_json(parse_json_lenient(t::slurp(t::data_dir() / "filter_task.json")));
    CHECK_FALSE(filter.facet.has_value());
    const auto facet = task_facet(filter);
    REQUIRE(facet.has_value());
    CHECK(*facet == Facet{"Color", "Black"});
}

TEST_CASE("lenient parsing only strips trailing commas outside strings") {
    CHECK(parse_json_lenient(R"({"a": [1, 2,], })") == json::parse(R"({"a": [1, 2]})"));
    CHECK(parse_json_lenient(R"({"a": "x,]"})")["a"] == "x,]");
    CHECK_THROWS(parse_json_lenient("[1 2]"));
    CHECK_THROWS(parse_json_lenient("{\"a\": }"));
}

TEST_CASE("malformed tasks are schema errors") {
    const json good = parse_json_lenient(t::slurp(t::data_dir() / "policy_task.json"));
    auto broken = [&](auto mutate) {
        json doc = good;
        mutate(doc);
        return doc;
    };
    CHECK_THROWS_AS(task_from_json(json::array()), TaskSchemaError);
    CHECK_THROWS_AS(task_from_json(broken([](json& d) { d.erase("id"); })), TaskSchemaError);
    CHECK_THROWS_AS(task_from_json(broken([](json& d) { d["id"] = ""; })), TaskSchemaError);
    CHECK_THROWS_AS(task_from_json(broken([](json& d) { d["type"] = "checkout"; })), TaskSchemaError);
    CHECK_THROWS_AS(task_from_json(broken([](json& d) { d["intent"] = 3; })), TaskSchemaError);
    CHECK_THROWS_AS(task_from_json(broken([](json& d) { d["success_criteria"] = "x"; })), TaskSchemaError);
    CHECK_THROWS_AS(task_from_json(broken([](json& d) { d["success_criteria"]["url_contains"] = "policies"; })),
                    TaskSchemaError);
    CHECK_THROWS_AS(task_from_json(broken([](json& d) { d["url_contains_alt"] = "/pages/x"; })), TaskSchemaError);
    CHECK_THROWS_AS(task_from_json(broken([](json& d) { d["bundle_tag"] = "medium"; })), TaskSchemaError);
    CHECK_THROWS_AS(task_from_json(broken([](json& d) { d["facet"] = "Color"; })), TaskSchemaError);
}

TEST_CASE("benchmark files round-trip and enforce the bundle partition") {
    const ShopBundle bundle = fixture_shop("mock_cookware");
    const BenchmarkFile file = assemble_benchmark(bundle, generate_short_tasks(bundle), {});
    const json doc = file;
    CHECK(benchmark_from_json(doc) == file);
    CHECK(json(benchmark_from_json(doc)) == doc);

    t::TempDir dir;
    save_benchmark(file, (dir / "b.json").string());
    CHECK(load_benchmark((dir / "b.json").string()) == file);

    json dup = doc;
    dup["tasks"].push_back(dup["tasks"][0]);
    CHECK_THROWS_AS(benchmark_from_json(dup), TaskSchemaError);

    json unknown = doc;
    unknown["bundles"]["easy_short_horizon"].push_back("ghost");
    CHECK_THROWS_AS(benchmark_from_json(unknown), TaskSchemaError);

    json missing = doc;
    missing["bundles"]["easy_short_horizon"].erase(0);
    CHECK_THROWS_AS(benchmark_from_json(missing), TaskSchemaError);

    t::spit(dir / "bad.json", "{not json");
    CHECK_THROWS_AS(load_benchmark((dir / "bad.json").string()), TaskSchemaError);
}

TEST_CASE("task documents come in several shapes") {
    const json one = parse_json_lenient(t::slurp(t::data_dir() / "filter_task.json"));
    CHECK(tasks_from_document(one).size() == 1);
    CHECK(tasks_from_document(json::array({one, one})).size() == 2);
    CHECK(tasks_from_document(json{{"tasks", json::array({one})}}).size() == 1);
    CHECK_THROWS_AS(tasks_from_document(json{{"tasks", 4}}), TaskSchemaError);
}

TEST_CASE("rule severities and names") {
    const std::map<Rule, Severity> expected{
        {Rule::unknown_collection, Severity::error},      {Rule::unknown_product, Severity::error},
        {Rule::infeasible_filter, Severity::error},       {Rule::intent_answer_leak, Severity::error},
        {Rule::option_mismatch, Severity::warning},       {Rule::product_not_in_collection, Severity::warning},
        {Rule::unknown_page, Severity::warning},
    };
    for (Rule rule : kAllRules) {
        CHECK(rule_severity(rule) == expected.at(rule));
        CHECK(parse_rule(rule_name(rule)) == rule);
    }
    CHECK(rule_name(Rule::intent_answer_leak) == "intent-answer-leak");
    CHECK_FALSE(parse_rule("made-up").has_value());
}

TEST_CASE("each planted task triggers exactly its rule") {
    const ShopBundle bundle = fixture_shop("mock_cookware");
    for (const auto& [rule, task] : t::planted_corpus()) {
        CAPTURE(rule_name(rule));
        const auto issues = validate({task}, bundle);
        REQUIRE(issues.size() == 1);
        CHECK(issues[0].rule == rule);
        CHECK(issues[0].severity == rule_severity(rule));
        CHECK(issues[0].task_id == task.id);
    }
}

TEST_CASE("planted corpus yields one issue per rule") {
    const ShopBundle bundle = fixture_shop("mock_cookware");
    const auto issues = validate(t::planted_tasks(), bundle);
    CHECK(issues.size() == std::size(kAllRules));
    for (Rule rule : kAllRules) {
        CHECK(std::count_if(issues.begin(), issues.end(), [&](const Issue& i) { return i.rule == rule; }) == 1);
    }
    const auto actionable = actionable_subset(issues);
    CHECK(actionable.size() == 6);
    CHECK(std::none_of(actionable.begin(), actionable.end(), [](const Issue& i) { return i.rule == Rule::unknown_page; }));

    const Disposition d = exit_disposition(issues);
    CHECK(d.code == 2);
    CHECK(d.report.find("4 error(s), 3 warning(s)") != std::string::npos);
    CHECK(d.report.find("plant-1\n") < d.report.find("plant-7\n"));

    for (const auto& issue : issues) CHECK(issue_from_json(json(issue)) == issue);
}

TEST_CASE("generated tasks on every fixture are clean") {
    for (const auto& name : fixture_names()) {
        CAPTURE(name);
        const ShopBundle bundle = fixture_shop(name);
        const auto issues = validate(generate_short_tasks(bundle), bundle);
        std::string messages;
        for (const auto& i : issues) messages += i.message + "\n";
        CAPTURE(messages);
        CHECK(issues.empty());
        CHECK(exit_disposition(issues).code == 0);
    }
}

TEST_CASE("warnings alone do not fail validation") {
    const ShopBundle bundle = fixture_shop("mock_cookware");
    const auto corpus = t::planted_corpus();
    std::vector<Task> warnings_only;
    for (const auto& [rule, task] : corpus) {
        if (rule_severity(rule) == Severity::warning) warnings_only.push_back(task);
    }
    const auto issues = validate(warnings_only, bundle);
    CHECK(issues.size() == 3);
    const Disposition d = exit_disposition(issues);
    CHECK(d.code == 0);
    CHECK(d.report.find("0 error(s), 3 warning(s)") != std::string::npos);
}

TEST_CASE("validation ignores a dangling page when an alternate hint resolves") {
    const ShopBundle bundle = fixture_shop("mock_cookware");
    Task t1 = t::make_task("ok-1", TaskType::navigation, "Find the refund policy.", "/policies/refund-policy",
                           "page_navigation");
    t1.url_contains_alt = std::vector<std::string>{"/pages/return-policy"};
    CHECK(validate({t1}, bundle).empty());
}

TEST_CASE("url hint handles and facet parsing") {
    CHECK(handle_in_hint("/collections/knives?filter.Color=Black", "collections") == "knives");
    CHECK(handle_in_hint("https://x.test/products/Chef-Knife/", "products") == "chef-knife");
    CHECK_FALSE(handle_in_hint("/collections/", "collections").has_value());
    CHECK_FALSE(handle_in_hint("/pages/faq", "products").has_value());

    Task task;
    task.intent = "Apply a Size filter for 'M' and add a shirt.";
    CHECK(task_facet(task) == Facet{"Size", "M"});
    task.facet = Facet{"Color", "Red"};
    CHECK(task_facet(task) == Facet{"Color", "Red"});
    task = Task{};
    task.intent = "Open the knives.";
    CHECK_FALSE(task_facet(task).has_value());
}
