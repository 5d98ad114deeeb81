#include <doctest.h>

#include <cmath>
#include <thread>

#include "corpus.hpp"
#include "storebench/fixtures.hpp"
#include "storebench/runner.hpp"
#include "storebench/taskgen.hpp"
#include "support.hpp"

using namespace storebench;
using nlohmann::json;
namespace t = storebench::testing;

namespace {

class CountingJudge : public Judge {
public:
    explicit CountingJudge(bool answer, bool fail = false) : answer_(answer), fail_(fail) {}
    JudgeResult judge(const JudgeInput&) override {
        ++calls;
        if (fail_) throw std::runtime_error("backend down");
        return JudgeResult{answer_, "counted"};
    }
    int calls = 0;

private:
    bool answer_;
    bool fail_;
};

/// Replays a fixed list of actions, then ends.
class ReplayAgent : public Agent {
public:
    explicit ReplayAgent(std::vector<Action> actions, std::chrono::milliseconds delay = {})
        : actions_(std::move(actions)), delay_(delay) {}
    Action next(const Task&, const Observation&) override {
        if (delay_.count()) std::this_thread::sleep_for(delay_);
        if (index_ < actions_.size()) return actions_[index_++];
        return Action{ActionKind::end, {}, {}, "done", {}};
    }

private:
    std::vector<Action> actions_;
    std::size_t index_ = 0;
    std::chrono::milliseconds delay_;
};

class ThrowingAgent : public Agent {
public:
    Action next(const Task&, const Observation&) override { throw std::runtime_error("adapter crashed"); }
};

RolloutRecord rollout_with(Termination termination, std::vector<std::string> urls) {
    RolloutRecord r;
    r.task_id = "t";
    r.termination = termination;
    r.urls_visited = std::move(urls);
    return r;
}

Task collection_task() {
    return t::make_task("t", TaskType::shopping, "Open the knives.", "/collections/knives", "navigation");
}

}  // namespace

TEST_CASE("the hard url gate runs before the judge") {
    const Task task = collection_task();
    CountingJudge judge(true);
    const Verdict miss = gate_and_judge(rollout_with(Termination::agent_end, {"/", "/cart"}), task, judge, GateMode::hard_url);
    CHECK_FALSE(miss.success);
    CHECK(miss.gated);
    CHECK(judge.calls == 0);

    const Verdict hit =
        gate_and_judge(rollout_with(Termination::agent_end, {"/", "/collections/knives"}), task, judge, GateMode::hard_url);
    CHECK(hit.success);
    CHECK_FALSE(hit.gated);
    CHECK(judge.calls == 1);

    // Under the soft gate the judge sees every agent-ended rollout.
    const Verdict soft = gate_and_judge(rollout_with(Termination::agent_end, {"/"}), task, judge, GateMode::soft_url);
    CHECK(soft.success);
    CHECK(judge.calls == 2);
}

TEST_CASE("limit terminations are forced failures in every mode") {
    const Task task = collection_task();
    for (GateMode mode : {GateMode::soft_url, GateMode::hard_url}) {
        for (Termination term : {Termination::steps_limit_reached, Termination::time_limit_reached}) {
            CountingJudge judge(true);
            const Verdict v = gate_and_judge(rollout_with(term, {"/collections/knives"}), task, judge, mode);
            CHECK_FALSE(v.success);
            CHECK(v.gated);
            CHECK(judge.calls == 0);
        }
    }
}

TEST_CASE("a failing judge yields a gated failure") {
    CountingJudge judge(true, true);
    const Verdict v = gate_and_judge(rollout_with(Termination::agent_end, {"/collections/knives"}), collection_task(), judge,
                                     GateMode::soft_url);
    CHECK_FALSE(v.success);
    CHECK(v.gated);
    CHECK(v.reasoning.find("judge unavailable") != std::string::npos);
}

TEST_CASE("url gate accepts alternates and substrings") {
    Task task = collection_task();
    task.url_contains_alt = std::vector<std::string>{"/collections/all"};
    CHECK(url_gate_passes({"/collections/knives?sort_by=price_asc"}, task));
    CHECK(url_gate_passes({"/collections/all"}, task));
    CHECK_FALSE(url_gate_passes({"/collections/kitchen-tools"}, task));
    CHECK_FALSE(url_gate_passes({}, task));
}

TEST_CASE("step and wall-clock budgets end the rollout") {
    Storefront sf(fixture_shop("tiny"));
    auto transport = make_storefront_transport(sf);
    const Task task = collection_task();

    ReplayAgent idle(std::vector<Action>(10, Action{ActionKind::noop, {}, {}, "wait", {}}));
    const RolloutRecord none = run_task(idle, task, *transport, Budgets{0, std::nullopt});
    CHECK(none.termination == Termination::steps_limit_reached);
    CHECK(none.steps_used == 0);
    CHECK(none.actions.empty());
    CHECK(none.urls_visited == std::vector<std::string>{"/"});

    ReplayAgent idle3(std::vector<Action>(10, Action{ActionKind::noop, {}, {}, "wait", {}}));
    const RolloutRecord three = run_task(idle3, task, *transport, Budgets{3, std::nullopt});
    CHECK(three.termination == Termination::steps_limit_reached);
    CHECK(three.steps_used == 3);
    CHECK(three.memory_log.size() == 3);
    CHECK(three.cart_snapshots.size() == 3);

    ReplayAgent slow(std::vector<Action>(10, Action{ActionKind::noop, {}, {}, "wait", {}}), std::chrono::milliseconds(30));
    const RolloutRecord timed = run_task(slow, task, *transport, Budgets{40, std::chrono::milliseconds(50)});
    CHECK(timed.termination == Termination::time_limit_reached);
    CHECK(timed.steps_used < 10);

    ThrowingAgent broken;
    const RolloutRecord crashed = run_task(broken, task, *transport, Budgets{40, std::nullopt});
    CHECK(crashed.termination == Termination::time_limit_reached);
    REQUIRE(crashed.crash.has_value());
    CHECK(crashed.crash->find("adapter crashed") != std::string::npos);
}

TEST_CASE("ending with a note records the infeasibility claim") {
    Storefront sf(fixture_shop("tiny"));
    auto transport = make_storefront_transport(sf);
    ReplayAgent agent({Action{ActionKind::goto_url, "/collections/essentials", {}, "open", "opened essentials"},
                       Action{ActionKind::end, {}, "not possible here", "give up", {}}});
    const RolloutRecord r = run_task(agent, collection_task(), *transport, Budgets{});
    CHECK(r.termination == Termination::agent_end);
    CHECK(r.steps_used == 2);
    CHECK(r.note == "not possible here");
    CHECK(r.memory_log.front() == "opened essentials");
    CHECK(r.urls_visited.back() == "/collections/essentials");
    CHECK(to_json(r)["termination"] == "agent_end");
}

TEST_CASE("resetting the environment clears carts between cells") {
    Storefront sf(fixture_shop("mock_cookware"));
    auto transport = make_storefront_transport(sf);
    const ShopBundle bundle = fixture_shop("mock_cookware");
    const Task exact = gen_discovery(bundle, 1).front();
    auto agent = make_scripted_agent();
    const RolloutRecord r = run_task(*agent, exact, *transport, Budgets{});
    REQUIRE(r.final_cart().item_count() > 0);
    const std::string session = r.final_cart().session_id;
    CHECK(json::parse(t::get(sf, "/cart.js", session).body)["item_count"] > 0);

    reset_environment(*transport);
    CHECK(json::parse(t::get(sf, "/cart.js", session).body)["item_count"] == 0);

    auto dead = make_http_transport("http://127.0.0.1:1");
    CHECK_THROWS_AS(reset_environment(*dead), RunError);
    ReplayAgent idle({});
    CHECK_THROWS_AS(run_task(idle, exact, *dead, Budgets{}), RunError);
}

TEST_CASE("standard error examples") {
    CHECK(standard_error({}) == 0);
    CHECK(standard_error({1.0}) == 0);
    CHECK(standard_error({1.0, 1.0, 1.0}) == 0);
    // Sample sd of {1, 0, 1} is sqrt(1/3); over sqrt(3) that is 1/3.
    CHECK(standard_error({1.0, 0.0, 1.0}) == doctest::Approx(1.0 / 3.0));
    CHECK(standard_error({0.5, 1.0}) == doctest::Approx(0.25));
}

TEST_CASE("aggregation groups by bundle and repeat") {
    BenchmarkFile file;
    file.shop_slug = "s";
    for (const char* id : {"a", "b", "j"}) file.tasks.push_back(t::make_task(id, TaskType::shopping, "x", "/", "navigation"));
    file.easy_short_horizon = {"a", "b"};
    file.hard_long_horizon = {"j"};
    file.tasks.push_back(t::make_task("loose", TaskType::shopping, "x", "/", "navigation"));

    std::vector<CellVerdict> cells;
    auto cell = [&](const char* id, int repeat, bool ok) {
        Verdict v;
        v.task_id = id;
        v.success = ok;
        cells.push_back(CellVerdict{id, repeat, v});
    };
    // Repeat pass rates for the easy bundle: 1.0, 0.5, 0.5.
    cell("a", 0, true), cell("a", 1, true), cell("a", 2, false);
    cell("b", 0, true), cell("b", 1, false), cell("b", 2, true);
    cell("j", 0, false), cell("j", 1, false), cell("j", 2, false);
    cell("loose", 0, true);

    const AggregateReport report = aggregate(cells, file);
    REQUIRE(report.tasks.size() == 4);
    CHECK(report.tasks[0].mean == doctest::Approx(2.0 / 3.0));
    CHECK(report.tasks[0].sem == doctest::Approx(1.0 / 3.0));
    CHECK(report.tasks[0].repeats == 3);
    CHECK(report.tasks[3].bundle == "untagged");

    const BundleAggregate& easy = report.bundles.at("easy_short_horizon");
    CHECK(easy.tasks == 2);
    CHECK(easy.cells == 6);
    CHECK(easy.repeats == 3);
    CHECK(easy.pass_rate == doctest::Approx(4.0 / 6.0));
    const double mean = 2.0 / 3.0;
    const double sd = std::sqrt(((1 - mean) * (1 - mean) + 2 * (0.5 - mean) * (0.5 - mean)) / 2.0);
    CHECK(easy.sem == doctest::Approx(sd / std::sqrt(3.0)));
    CHECK(report.bundles.at("hard_long_horizon").pass_rate == 0);
    CHECK(report.bundles.at("untagged").sem == 0);

    const std::string table = render_table(report);
    CHECK(table.find("easy_short_horizon") != std::string::npos);
    CHECK(to_json(report)["bundles"].size() == 3);
}

TEST_CASE("profile constants") {
    const Profile internal = internal_profile();
    CHECK(internal.budgets.max_steps == 40);
    CHECK(internal.budgets.max_wall_clock == std::chrono::milliseconds(850'000));
    CHECK(internal.mode == GateMode::soft_url);
    const Profile bg = browsergym_profile();
    CHECK(bg.budgets.max_steps == 30);
    CHECK_FALSE(bg.budgets.max_wall_clock.has_value());
    CHECK(bg.mode == GateMode::hard_url);
    CHECK(kDefaultRepeats == 3);
    CHECK(BenchOptions{}.repeats == 3);
    CHECK(profile_by_name("browsergym").name == "browsergym");
    CHECK_THROWS_AS(profile_by_name("fast"), std::invalid_argument);
}

TEST_CASE("actions round-trip through JSON") {
    const Action a{ActionKind::fill, "elem-3", "skillet", "type query", "searched"};
    const Action back = action_from_json(to_json(a));
    CHECK(back.kind == a.kind);
    CHECK(back.target == a.target);
    CHECK(back.value == a.value);
    CHECK(back.memory == a.memory);
    CHECK_THROWS_AS(action_from_json(json{{"action", "fly"}}), std::invalid_argument);
    CHECK_THROWS_AS(action_from_json(json{{"action", "click"}}), std::invalid_argument);
    CHECK_THROWS_AS(action_from_json(json::array()), std::invalid_argument);
    for (ActionKind k : {ActionKind::goto_url, ActionKind::click, ActionKind::fill, ActionKind::select_option,
                         ActionKind::check, ActionKind::go_back, ActionKind::noop, ActionKind::end}) {
        CHECK(parse_action_kind(action_kind_name(k)) == k);
    }
}

TEST_CASE("rules judge checks the cart against the criteria") {
    auto judge = make_rules_judge();
    const ShopBundle bundle = fixture_shop("mock_cookware");
    const Task exact = gen_discovery(bundle, 1).front();
    const std::string handle = *handle_in_hint(*exact.success_criteria.url_contains, "products");

    CartState right;
    right.lines.push_back(CartLine{"v1", handle, "x", 1, Money::parse("1.00"), std::nullopt});
    CartState wrong;
    wrong.lines.push_back(CartLine{"v2", "something-else", "y", 1, Money::parse("1.00"), std::nullopt});
    const std::vector<std::string> urls{"/", *exact.success_criteria.url_contains};
    CHECK(judge->judge(JudgeInput{exact, {}, urls, Termination::agent_end, {right}}).success);
    CHECK_FALSE(judge->judge(JudgeInput{exact, {}, urls, Termination::agent_end, {wrong}}).success);
    CHECK_FALSE(judge->judge(JudgeInput{exact, {}, urls, Termination::agent_end, {}}).success);
    CHECK(make_stub_judge()->judge(JudgeInput{exact, {}, {}, Termination::agent_end, {}}).success);
}

TEST_CASE("scripted agent passes every easy task on every fixture") {
    for (const auto& name : fixture_names()) {
        CAPTURE(name);
        const ShopBundle bundle = fixture_shop(name);
        const BenchmarkFile file = assemble_benchmark(bundle, generate_short_tasks(bundle), {});
        Storefront sf(bundle);
        auto transport = make_storefront_transport(sf);
        auto judge = make_rules_judge();
        BenchOptions options;
        options.profile = browsergym_profile();
        options.repeats = 1;
        const BenchResult result = run_benchmark(file, *transport, make_scripted_agent, *judge, options);
        CHECK(result.cells.size() == file.tasks.size());
        for (const auto& cell : result.cells) {
            CAPTURE(cell.task_id);
            CAPTURE(cell.verdict.reasoning);
            CHECK(cell.verdict.success);
        }
        CHECK(result.report.bundles.at("easy_short_horizon").pass_rate == doctest::Approx(1.0));
        const json doc = to_json(result, options);
        CHECK(doc["profile"]["name"] == "browsergym");
    }
}

TEST_CASE("journeys declared infeasible by the scripted agent fail") {
    const ShopBundle bundle = fixture_shop("mock_cookware");
    Task journey = t::make_task("mock_cookware-e2e-v1-1", TaskType::shopping,
                                "Open the Knives collection, compare two knives, and add the cheaper one to cart.",
                                "/collections/knives", "cart_after_navigation");
    CHECK(scripted_skill(journey).empty());
    const BenchmarkFile file = assemble_benchmark(bundle, {}, {journey});
    Storefront sf(bundle);
    auto transport = make_storefront_transport(sf);
    auto judge = make_rules_judge();
    const BenchResult result = run_benchmark(file, *transport, make_scripted_agent, *judge, BenchOptions{});
    CHECK(result.cells.size() == 3);
    CHECK(result.report.bundles.at("hard_long_horizon").pass_rate == 0);
    CHECK(result.rollouts.front().note.has_value());
}

TEST_CASE("process agents and judges speak JSON over stdio") {
    t::TempDir dir;
    Storefront sf(fixture_shop("tiny"));
    auto transport = make_storefront_transport(sf);
    t::spit(dir / "agent.sh", "cat > /dev/null\necho '{\"action\": \"end\", \"instruction\": \"stop\"}'\n");
    auto agent = make_process_agent("sh " + (dir / "agent.sh").string(), std::chrono::seconds(10));
    const RolloutRecord r = run_task(*agent, collection_task(), *transport, Budgets{});
    CHECK(r.termination == Termination::agent_end);
    CHECK(r.steps_used == 1);

    auto garbage = make_process_agent("echo nope", std::chrono::seconds(10));
    CHECK(run_task(*garbage, collection_task(), *transport, Budgets{}).crash.has_value());

    t::spit(dir / "judge.sh", "cat > " + (dir / "in.json").string() + "\necho '{\"success\": true, \"reasoning\": \"ok\"}'\n");
    auto judge = make_process_judge("sh " + (dir / "judge.sh").string(), std::chrono::seconds(10));
    const JudgeResult jr = judge->judge(JudgeInput{collection_task(), {"m"}, {"/"}, Termination::agent_end, {}});
    CHECK(jr.success);
    CHECK(json::parse(t::slurp(dir / "in.json"))["termination"] == "agent_end");

    auto bad = make_process_judge("echo '{\"verdict\": 1}'", std::chrono::seconds(10));
    CHECK_THROWS(bad->judge(JudgeInput{collection_task(), {}, {}, Termination::agent_end, {}}));
}
