#include <doctest.h>

#include <deque>

#include "corpus.hpp"
#include "storebench/fixtures.hpp"
#include "storebench/journey.hpp"
#include "support.hpp"

using namespace storebench;
using nlohmann::json;
namespace t = storebench::testing;

namespace {

/// Replies from a queue and records every request.
class ScriptedGenerator : public TextGenerator {
public:
    explicit ScriptedGenerator(std::deque<std::string> replies) : replies_(std::move(replies)) {}

    std::string complete(const GenerationRequest& request, std::chrono::milliseconds) override {
        requests.push_back(request);
        if (replies_.empty()) throw GeneratorError("script exhausted");
        std::string next = replies_.front();
        if (replies_.size() > 1) replies_.pop_front();
        return next;
    }

    std::vector<GenerationRequest> requests;

private:
    std::deque<std::string> replies_;
};

const char* kSlug = "mock_cookware";

Task good_journey(std::size_t n) {
    return t::make_task(journey_id(kSlug, n), TaskType::shopping,
                        "Open the Knives collection from the menu, sort it by price, open any knife and add it to cart.",
                        "/collections/knives", "cart_after_navigation");
}

Task bad_journey(std::size_t n) {
    return t::make_task(journey_id(kSlug, n), TaskType::shopping, "Find the copper skillet and add it to cart.",
                        "/products/copper-skillet", "cart_exact");
}

std::string reply(const std::vector<Task>& tasks) { return json{{"tasks", tasks}}.dump(); }

}  // namespace

TEST_CASE("a clean first reply needs no polish rounds") {
    const ShopBundle bundle = fixture_shop(kSlug);
    ScriptedGenerator gen({reply({good_journey(1), good_journey(2)})});
    const JourneyResult r = generate_journeys(gen, bundle, 2);
    CHECK(r.exit_code == 0);
    CHECK(r.rounds_used == 0);
    CHECK(r.generator_calls == 1);
    CHECK(r.tasks.size() == 2);
    REQUIRE(gen.requests.size() == 1);
    CHECK(gen.requests[0].mode == GenerationMode::initial);
    CHECK(gen.requests[0].expected_ids == std::vector<std::string>{journey_id(kSlug, 1), journey_id(kSlug, 2)});
}

TEST_CASE("a converging generator finishes within two rounds and keeps ids") {
    const ShopBundle bundle = fixture_shop(kSlug);
    ScriptedGenerator gen({reply({good_journey(1), bad_journey(2), good_journey(3)}), reply({bad_journey(2)}),
                           reply({good_journey(2)})});
    const JourneyResult r = generate_journeys(gen, bundle, 3);
    CHECK(r.exit_code == 0);
    CHECK(r.rounds_used == 2);
    CHECK(r.generator_calls == 3);
    REQUIRE(r.tasks.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(r.tasks[i].id == journey_id(kSlug, i + 1));
    CHECK(validate(r.tasks, bundle).empty());

    // Only the flagged task is sent back, and unflagged tasks pass through untouched.
    for (std::size_t i = 1; i < gen.requests.size(); ++i) {
        CHECK(gen.requests[i].mode == GenerationMode::polish);
        CHECK(gen.requests[i].expected_ids == std::vector<std::string>{journey_id(kSlug, 2)});
        CHECK(gen.requests[i].user.find(journey_id(kSlug, 1) + ":") == std::string::npos);
        CHECK(gen.requests[i].user.find("Task " + journey_id(kSlug, 2) + ":") != std::string::npos);
    }
    CHECK(r.tasks[0] == good_journey(1));
    CHECK(r.tasks[2] == good_journey(3));
    REQUIRE(r.rounds.size() == 3);
    CHECK(r.rounds[0].flagged_ids == std::set<std::string>{journey_id(kSlug, 2)});
    CHECK(r.rounds[2].flagged_ids.empty());
}

TEST_CASE("a stubborn generator halts after exactly two rounds with nothing emitted") {
    const ShopBundle bundle = fixture_shop(kSlug);
    ScriptedGenerator gen({reply({bad_journey(1), good_journey(2)}), reply({bad_journey(1)})});
    const JourneyResult r = generate_journeys(gen, bundle, 2);
    CHECK(r.exit_code == kHaltExitCode);
    CHECK(r.exit_code == 3);
    CHECK(r.halted());
    CHECK(r.rounds_used == kMaxPolishRounds);
    CHECK(r.generator_calls == 3);
    CHECK(r.tasks.empty());
    CHECK(r.halt_reason.find("still flagged") != std::string::npos);
    const json log = audit_log(r);
    CHECK(log["exit_code"] == 3);
    CHECK(log["rounds"].size() == 3);
}

TEST_CASE("warnings outside the actionable subset are not sent for polish") {
    const ShopBundle bundle = fixture_shop(kSlug);
    Task page = t::make_task(journey_id(kSlug, 1), TaskType::navigation, "Find the shipping information page.",
                             "/pages/shipping", "page_navigation");
    ScriptedGenerator gen({reply({page})});
    const JourneyResult r = generate_journeys(gen, bundle, 1);
    CHECK(r.exit_code == 0);
    CHECK(r.rounds_used == 0);
    REQUIRE(r.rounds.size() == 1);
    CHECK(r.rounds[0].issues.size() == 1);
    CHECK(r.rounds[0].flagged_ids.empty());
}

TEST_CASE("regenerated tasks with changed ids are rejected") {
    const ShopBundle bundle = fixture_shop(kSlug);
    Task renamed = good_journey(1);
    renamed.id = "something-else";
    ScriptedGenerator gen({reply({bad_journey(1)}), reply({renamed}), reply({good_journey(1)})});
    const JourneyResult r = generate_journeys(gen, bundle, 1);
    CHECK(r.exit_code == 0);
    CHECK(r.rounds_used == 2);
    REQUIRE(r.rounds.size() == 3);
    CHECK(r.rounds[1].rejected_ids == std::vector<std::string>{"something-else"});
    CHECK(r.rounds[1].flagged_ids == std::set<std::string>{journey_id(kSlug, 1)});
}

TEST_CASE("one unusable reply is retried; a second halts") {
    const ShopBundle bundle = fixture_shop(kSlug);
    ScriptedGenerator once({"I cannot help with that.", reply({good_journey(1)})});
    const JourneyResult ok = generate_journeys(once, bundle, 1);
    CHECK(ok.exit_code == 0);
    CHECK(ok.generator_calls == 2);
    CHECK(once.requests[1].mode == GenerationMode::retry);

    ScriptedGenerator twice({"nope"});
    const JourneyResult halted = generate_journeys(twice, bundle, 1);
    CHECK(halted.exit_code == kHaltExitCode);
    CHECK(halted.generator_calls == 2);
    CHECK(halted.tasks.empty());

    // Wrong ids on the initial pass count as unusable.
    ScriptedGenerator wrong({reply({good_journey(2)})});
    CHECK(generate_journeys(wrong, bundle, 1).exit_code == kHaltExitCode);
}

TEST_CASE("completions are parsed through prose and code fences") {
    const std::string fenced = "Here you go:\n```json\n" + reply({good_journey(1)}) + "\n```\nThanks";
    CHECK(parse_generated_tasks(fenced).size() == 1);
    CHECK(parse_generated_tasks(json::array({good_journey(1)}).dump()).size() == 1);
    CHECK_THROWS_AS(parse_generated_tasks("no json here"), TaskSchemaError);
    CHECK_THROWS_AS(parse_generated_tasks(R"({"items": []})"), TaskSchemaError);
    CHECK_THROWS_AS(parse_generated_tasks(R"({"tasks": [{"id": ""}]})"), TaskSchemaError);
}

TEST_CASE("merging replaces by id and preserves order") {
    const std::vector<Task> original{good_journey(1), bad_journey(2), good_journey(3)};
    const std::vector<Task> merged = merge_regenerated(original, {good_journey(2)}, {journey_id(kSlug, 2)});
    CHECK(merged == std::vector<Task>{good_journey(1), good_journey(2), good_journey(3)});
    CHECK(merge_regenerated(original, {}, {journey_id(kSlug, 2)}) == original);
    CHECK_THROWS_AS(merge_regenerated(original, {good_journey(1)}, {journey_id(kSlug, 2)}), MergeError);
    CHECK_THROWS_AS(merge_regenerated(original, {good_journey(2), good_journey(2)}, {journey_id(kSlug, 2)}), MergeError);
}

TEST_CASE("the journey prompt carries the shop context and reference examples") {
    const ShopBundle bundle = fixture_shop(kSlug);
    PromptOptions options;
    options.domain = "http://shop.test";
    const PromptContext ctx = build_prompt(bundle, 5, options);
    CHECK(ctx.few_shot.size() == 8);
    CHECK(few_shot_library().size() == 8);
    CHECK(ctx.system_prompt == journey_system_prompt());
    CHECK(ctx.user_prompt.find("Author 5 end-to-end evaluation tasks") != std::string::npos);
    CHECK(ctx.user_prompt.find("\"mock_cookware-e2e-v1-{index}\"") != std::string::npos);
    CHECK(ctx.user_prompt.find("http://shop.test") != std::string::npos);
    for (const auto& line : membership_lines(bundle)) CHECK(ctx.user_prompt.find(line) != std::string::npos);
    for (const auto& example : ctx.few_shot) CHECK(ctx.user_prompt.find(example.intent) != std::string::npos);
    // The cookware shop sells a gift card, so that category stays applicable.
    CHECK(ctx.user_prompt.find("this shop sells no gift cards") == std::string::npos);
    CHECK(build_prompt(fixture_shop("tiny"), 1).user_prompt.find("this shop sells no gift cards") != std::string::npos);

    CHECK_THROWS_AS(build_prompt(bundle, 0), PromptError);
    const ShopBundle empty = make_bundle("bare", {simple_product("a", "A", "V", "T", Money::parse("1.00"), 1)}, {}, {},
                                         default_capabilities("bare", "Bare"));
    CHECK_THROWS_AS(build_prompt(empty, 1), PromptError);
}

TEST_CASE("membership lines list only active products with collections") {
    const ShopBundle bundle = fixture_shop(kSlug);
    for (const auto& line : membership_lines(bundle)) {
        const std::string handle = line.substr(0, line.find(" -> "));
        const Product* p = bundle.find_product(handle);
        REQUIRE(p != nullptr);
        CHECK(p->is_active());
    }
    const auto lines = membership_lines(bundle);
    CHECK(std::none_of(lines.begin(), lines.end(), [](const std::string& l) { return l.rfind("seasoning-trio ", 0) == 0; }));
}

TEST_CASE("stub generators cover the clean, converging and stubborn paths") {
    const ShopBundle bundle = fixture_shop(kSlug);
    auto stub = make_stub_generator("stub", bundle);
    const JourneyResult clean = generate_journeys(*stub, bundle, 4);
    CHECK(clean.exit_code == 0);
    CHECK(clean.rounds_used == 0);
    CHECK(clean.tasks.size() == 4);

    auto polish = make_stub_generator("stub-polish", bundle);
    const JourneyResult fixed = generate_journeys(*polish, bundle, 4);
    CHECK(fixed.exit_code == 0);
    CHECK(fixed.rounds_used >= 1);
    CHECK(fixed.rounds_used <= kMaxPolishRounds);
    CHECK(validate(fixed.tasks, bundle).empty());

    auto stubborn = make_stub_generator("stub-stubborn", bundle);
    const JourneyResult halted = generate_journeys(*stubborn, bundle, 4);
    CHECK(halted.exit_code == kHaltExitCode);
    CHECK(halted.rounds_used == kMaxPolishRounds);
    CHECK(halted.tasks.empty());

    CHECK(is_stub_generator_name("stub-polish"));
    CHECK_FALSE(is_stub_generator_name("gpt"));
}

TEST_CASE("process generators exchange the request over stdin and stdout") {
    const ShopBundle bundle = fixture_shop(kSlug);
    t::TempDir dir;
    t::spit(dir / "reply.json", reply({good_journey(1)}));
    const std::string script = (dir / "gen.sh").string();
    t::spit(dir / "gen.sh", "#!/bin/sh\ncat > \"" + (dir / "request.json").string() + "\"\ncat \"" +
                                (dir / "reply.json").string() + "\"\n");
    auto gen = make_process_generator("sh " + script);
    const JourneyResult r = generate_journeys(*gen, bundle, 1);
    CHECK(r.exit_code == 0);
    REQUIRE(r.tasks.size() == 1);
    const json request = json::parse(t::slurp(dir / "request.json"));
    CHECK(request["mode"] == "initial");
    CHECK(request["shop_slug"] == kSlug);
    CHECK(request["expected_ids"] == json::array({journey_id(kSlug, 1)}));

    auto failing = make_process_generator("exit 7");
    CHECK_THROWS_AS(generate_journeys(*failing, bundle, 1), GeneratorError);
    auto slow = make_process_generator("sleep 5");
    JourneyOptions fast;
    fast.timeout = std::chrono::milliseconds(200);
    CHECK_THROWS_AS(generate_journeys(*slow, bundle, 1, fast), GeneratorError);
}
