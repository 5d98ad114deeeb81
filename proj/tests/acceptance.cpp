// Acceptance report: one PASS/FAIL line per primary criterion. Exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <random>
#include <thread>

#include "corpus.hpp"
#include "oracles.hpp"
#include "storebench/analyzer.hpp"
#include "storebench/fixtures.hpp"
#include "storebench/journey.hpp"
#include "storebench/runner.hpp"
#include "storebench/taskgen.hpp"
#include "storebench/validator.hpp"

using namespace storebench;
using nlohmann::json;
namespace t = storebench::testing;
using Clock = std::chrono::steady_clock;

namespace {

// Runtime ceilings per criterion.
constexpr std::chrono::milliseconds kValidatorLimit{1'000};
constexpr std::chrono::milliseconds kGeneratorLimit{30'000};
constexpr std::chrono::milliseconds kPolishLimit{5'000};
constexpr std::chrono::milliseconds kStorefrontLimit{120'000};
constexpr std::chrono::milliseconds kEndToEndLimit{120'000};
constexpr std::chrono::milliseconds kHarnessLimit{60'000};
constexpr std::chrono::milliseconds kAnalyzerLimit{60'000};
constexpr std::chrono::milliseconds kSchemaLimit{10'000};
// Absolute tolerance for floating-point aggregates.
constexpr double kFloatTolerance = 1e-12;
// Property-test sizes.
constexpr int kRandomBundles = 100;
constexpr int kFilterQueries = 1000;
constexpr int kCartSequences = 1000;

/// Counts failed expectations and keeps the first message.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        ++total_;
        if (ok) return;
        if (failures_++ == 0) first_ = what;
    }
    int failures() const { return failures_; }
    int total() const { return total_; }
    const std::string& first() const { return first_; }

private:
    int failures_ = 0;
    int total_ = 0;
    std::string first_;
};

void validator_conformance(Check& c) {
    const ShopBundle bundle = fixture_shop("mock_cookware");
    for (const auto& [rule, task] : t::planted_corpus()) {
        const auto issues = validate({task}, bundle);
        c.expect(issues.size() == 1 && issues[0].rule == rule, "planted task for " + std::string(rule_name(rule)));
    }
    const auto issues = validate(t::planted_tasks(), bundle);
    for (Rule rule : kAllRules) {
        const auto n = std::count_if(issues.begin(), issues.end(), [&](const Issue& i) { return i.rule == rule; });
        c.expect(n == 1, std::string(rule_name(rule)) + " fired " + std::to_string(n) + " times");
    }
    const std::map<Rule, Severity> table{
        {Rule::unknown_collection, Severity::error},      {Rule::unknown_product, Severity::error},
        {Rule::infeasible_filter, Severity::error},       {Rule::intent_answer_leak, Severity::error},
        {Rule::option_mismatch, Severity::warning},       {Rule::product_not_in_collection, Severity::warning},
        {Rule::unknown_page, Severity::warning},
    };
    for (const auto& issue : issues) c.expect(issue.severity == table.at(issue.rule), "severity of " + std::string(rule_name(issue.rule)));
    c.expect(exit_disposition(issues).code == 2, "errors exit with 2");
    c.expect(validate(generate_short_tasks(bundle), bundle).empty(), "clean corpus has issues");
    c.expect(exit_disposition({}).code == 0, "clean corpus exits 0");
    std::vector<Issue> warnings;
    for (const auto& i : issues) {
        if (i.severity == Severity::warning) warnings.push_back(i);
    }
    c.expect(exit_disposition(warnings).code == 0, "warnings alone exit 0");
}

void generator_groundedness(Check& c) {
    for (int seed = 0; seed < kRandomBundles; ++seed) {
        const ShopBundle bundle = random_bundle(static_cast<std::uint64_t>(seed));
        GeneratorConfig config;
        config.seed = static_cast<std::uint64_t>(seed);
        const auto tasks = generate_short_tasks(bundle, config);
        const std::string where = "seed " + std::to_string(seed) + ": ";
        for (const auto& issue : validate(tasks, bundle)) c.expect(issue.severity != Severity::error, where + issue.message);
        for (const auto& task : tasks) {
            if (!task.facet) continue;
            const auto handle = handle_in_hint(task.success_criteria.url_contains.value_or(""), "collections");
            c.expect(handle && t::facet_matches(bundle, *handle, *task.facet) > 0, where + "infeasible filter " + task.id);
        }
        std::set<std::string> types;
        for (const auto& task : tasks) {
            if (task.success_criteria.type != "cart_exact") continue;
            const auto handle = handle_in_hint(task.success_criteria.url_contains.value_or(""), "products");
            const Product* p = handle ? bundle.find_product(*handle) : nullptr;
            c.expect(p != nullptr, where + "discovery product missing " + task.id);
            if (!p) continue;
            c.expect(p->is_active() && !p->gift_card && p->any_available(), where + "ineligible product " + p->handle);
            c.expect(types.insert(to_lower(p->product_type)).second, where + "repeated type " + p->product_type);
        }
    }
}

class ScriptedGenerator : public TextGenerator {
public:
    explicit ScriptedGenerator(std::deque<std::string> replies) : replies_(std::move(replies)) {}
    std::string complete(const GenerationRequest&, std::chrono::milliseconds) override {
        std::string next = replies_.front();
        if (replies_.size() > 1) replies_.pop_front();
        return next;
    }

private:
    std::deque<std::string> replies_;
};

void polish_loop(Check& c) {
    const ShopBundle bundle = fixture_shop("mock_cookware");
    auto good = [](std::size_t n) {
        return t::make_task(journey_id("mock_cookware", n), TaskType::shopping,
                            "Open the Knives collection from the menu, sort it by price and add any knife to cart.",
                            "/collections/knives", "cart_after_navigation");
    };
    auto bad = [](std::size_t n) {
        return t::make_task(journey_id("mock_cookware", n), TaskType::shopping, "Find the copper skillet and add it to cart.",
                            "/products/copper-skillet", "cart_exact");
    };
    auto reply = [](const std::vector<Task>& tasks) { return json{{"tasks", tasks}}.dump(); };

    ScriptedGenerator converging({reply({bad(1), good(2), bad(3)}), reply({good(1), bad(3)}), reply({good(3)})});
    const JourneyResult ok = generate_journeys(converging, bundle, 3);
    c.expect(ok.exit_code == 0, "converging mock halted: " + ok.halt_reason);
    c.expect(ok.rounds_used >= 1 && ok.rounds_used <= 2, "converging rounds " + std::to_string(ok.rounds_used));
    std::set<std::string> ids;
    for (const auto& task : ok.tasks) ids.insert(task.id);
    c.expect(ids == std::set<std::string>{journey_id("mock_cookware", 1), journey_id("mock_cookware", 2),
                                          journey_id("mock_cookware", 3)},
             "id set not conserved");

    ScriptedGenerator stubborn({reply({bad(1), good(2)}), reply({bad(1)})});
    const JourneyResult halted = generate_journeys(stubborn, bundle, 2);
    c.expect(halted.exit_code != 0 && halted.exit_code == kHaltExitCode, "stubborn mock exit " + std::to_string(halted.exit_code));
    c.expect(halted.rounds_used == 2, "stubborn rounds " + std::to_string(halted.rounds_used));
    c.expect(halted.tasks.empty(), "stubborn mock emitted tasks");
}

void storefront_contract(Check& c) {
    for (const auto& name : fixture_names()) {
        Storefront sf(fixture_shop(name));
        const ShopBundle& b = sf.bundle();
        for (const auto& p : b.products()) c.expect(t::get(sf, "/products/" + p.handle).status == 200, "/products/" + p.handle);
        for (const auto& col : b.collections()) {
            c.expect(t::get(sf, "/collections/" + col.handle).status == 200, "/collections/" + col.handle);
            const auto cards = t::full_listing(sf, col.handle, {{"sort_by", "price_asc"}});
            c.expect(cards.size() == t::active_count(b, col), "listing size of " + col.handle);
            for (std::size_t i = 1; i < cards.size(); ++i) {
                c.expect(cards[i - 1].price_min_cents <= cards[i].price_min_cents, "price_asc order in " + col.handle);
            }
            // Pagination: 24 cards first, load-more only when there are more.
            const std::size_t n = t::active_count(b, col);
            const Response first = t::get(sf, "/collections/" + col.handle);
            c.expect(t::cards_in(first.body).size() == std::min<std::size_t>(n, 24), "first page size of " + col.handle);
            c.expect((first.body.find("data-sg-load-more") != std::string::npos) == (n > 24), "load-more link on " + col.handle);
            if (n > 24) {
                const auto rest = t::cards_in(t::get(sf, "/collections/" + col.handle + "?loaded=24&section=grid").body);
                c.expect(rest.size() == n - 24, "appended grid of " + col.handle);
            }
        }
        for (const auto& page : b.pages()) c.expect(t::get(sf, page.route()).status == 200, page.route());
        for (const char* fixed : {"/", "/cart", "/cart.js", "/search?q=a", "/search/suggest.json?q=a"}) {
            c.expect(t::get(sf, fixed).status == 200, fixed);
        }
    }

    std::mt19937_64 rng(2024);
    std::vector<std::unique_ptr<Storefront>> shops;
    for (const auto& name : fixture_names()) shops.push_back(std::make_unique<Storefront>(fixture_shop(name)));
    for (int q = 0; q < kFilterQueries; ++q) {
        Storefront& sf = *shops[rng() % shops.size()];
        const ShopBundle& b = sf.bundle();
        const Collection& col = b.collections()[rng() % b.collections().size()];
        const bool available = rng() % 2;
        const bool on_sale = rng() % 3 == 0;
        std::optional<Facet> facet;
        const OptionIndex& index = b.option_index(col.handle);
        if (!index.empty() && rng() % 2) {
            auto dim = index.begin();
            std::advance(dim, static_cast<long>(rng() % index.size()));
            auto value = dim->second.begin();
            std::advance(value, static_cast<long>(rng() % dim->second.size()));
            facet = Facet{dim->first, value->first};
        }
        QueryParams params;
        if (facet) params.emplace_back("filter." + facet->dimension, facet->value);
        if (available) params.emplace_back("available", "1");
        if (on_sale) params.emplace_back("on_sale", "1");
        const auto results = t::handles_of(t::full_listing(sf, col.handle, params));
        std::set<std::string> oracle;
        for (const auto& h : col.product_handles) {
            if (t::listing_matches(*b.find_product(h), available, on_sale, facet)) oracle.insert(h);
        }
        c.expect(results == oracle, "filter query " + std::to_string(q) + " on " + col.handle);
        QueryParams tighter = params;
        tighter.emplace_back(available ? "on_sale" : "available", "1");
        const auto narrowed = t::handles_of(t::full_listing(sf, col.handle, tighter));
        c.expect(std::includes(results.begin(), results.end(), narrowed.begin(), narrowed.end()),
                 "subset monotonicity on query " + std::to_string(q));
    }

    Storefront sf(fixture_shop("mock_cookware"));
    std::vector<const Variant*> buyable;
    std::map<std::string, std::int64_t> price;
    for (const auto& p : sf.bundle().products()) {
        for (const auto& v : p.variants) {
            price[v.id] = v.price.cents();
            if (p.is_active() && v.available) buyable.push_back(&v);
        }
    }
    for (int s = 0; s < kCartSequences; ++s) {
        std::string session;
        std::map<std::string, std::int64_t> oracle;
        const int steps = 1 + static_cast<int>(rng() % 12);
        for (int step = 0; step < steps; ++step) {
            const Variant* v = buyable[rng() % buyable.size()];
            std::int64_t qty = 0;
            std::string path;
            switch (rng() % 3) {
                case 0: path = "/cart/add", qty = 1 + static_cast<std::int64_t>(rng() % 3), oracle[v->id] += qty; break;
                case 1:
                    path = "/cart/update", qty = static_cast<std::int64_t>(rng() % 4);
                    if (qty == 0) {
                        oracle.erase(v->id);
                    } else {
                        oracle[v->id] = qty;
                    }
                    break;
                default: path = "/cart/remove", oracle.erase(v->id); break;
            }
            const Response r = t::post_json(sf, path, json{{"id", v->id}, {"quantity", qty}}, session);
            c.expect(r.status == 200, path + " answered " + std::to_string(r.status));
            if (const auto minted = t::session_from(r); !minted.empty()) session = minted;
        }
        std::int64_t expected = 0;
        for (const auto& [id, qty] : oracle) expected += qty * price[id];
        const json cart = json::parse(t::get(sf, "/cart.js", session).body);
        c.expect(Money::parse(cart["subtotal"].get<std::string>()).cents() == expected,
                 "subtotal of sequence " + std::to_string(s));
    }

    for (const auto& name : fixture_names()) {
        Storefront shop(fixture_shop(name));
        std::vector<std::string> targets{"/", "/cart", "/cart.js"};
        for (const auto& col : shop.bundle().collections()) targets.push_back("/collections/" + col.handle);
        std::vector<std::string> cold;
        for (const auto& target : targets) cold.push_back(t::get(shop, target).body);
        std::string session;
        for (const auto* v : {&shop.bundle().products().front().variants.front()}) {
            session = t::session_from(t::post_json(shop, "/cart/add", json{{"id", v->id}, {"quantity", 2}}));
        }
        c.expect(t::post_form(shop, "/__reset?scope=all", "").status == 200, "reset status");
        for (std::size_t i = 0; i < targets.size(); ++i) {
            c.expect(t::get(shop, targets[i]).body == cold[i], name + " cold start differs at " + targets[i]);
        }
    }
}

void end_to_end(Check& c) {
    const ShopBundle bundle = fixture_shop("mock_cookware");
    const BenchmarkFile file = assemble_benchmark(bundle, generate_short_tasks(bundle), {});
    Storefront sf(bundle);
    auto transport = make_storefront_transport(sf);
    auto judge = make_rules_judge();
    BenchOptions options;
    options.profile = browsergym_profile();
    options.repeats = 1;
    c.expect(options.profile.mode == GateMode::hard_url && options.profile.budgets.max_steps == 30, "browsergym profile");
    const BenchResult result = run_benchmark(file, *transport, make_scripted_agent, *judge, options);
    for (const auto& cell : result.cells) c.expect(cell.verdict.success, cell.task_id + ": " + cell.verdict.reasoning);
    c.expect(!result.cells.empty() && result.cells.size() == file.easy_short_horizon.size(), "cell count");
    const auto& easy = result.report.bundles.at("easy_short_horizon");
    c.expect(std::abs(easy.pass_rate - 1.0) <= kFloatTolerance, "easy pass rate " + std::to_string(easy.pass_rate));
}

class IdleAgent : public Agent {
public:
    explicit IdleAgent(std::chrono::milliseconds delay = {}) : delay_(delay) {}
    Action next(const Task&, const Observation&) override {
        if (delay_.count()) std::this_thread::sleep_for(delay_);
        return Action{ActionKind::noop, {}, {}, "wait", {}};
    }

private:
    std::chrono::milliseconds delay_;
};

class CrashingAgent : public Agent {
public:
    Action next(const Task&, const Observation&) override { throw std::runtime_error("crash"); }
};

void harness_constants(Check& c) {
    const Profile internal = internal_profile();
    c.expect(internal.budgets.max_steps == 40, "internal step budget");
    c.expect(internal.budgets.max_wall_clock == std::chrono::milliseconds(850'000), "internal wall clock");
    c.expect(kDefaultRepeats == 3 && BenchOptions{}.repeats == 3, "default repeats");

    Storefront sf(fixture_shop("mock_cookware"));
    auto transport = make_storefront_transport(sf);
    const Task task = t::make_task("idle", TaskType::shopping, "Open the knives.", "/collections/knives", "navigation");
    IdleAgent idle;
    const RolloutRecord capped = run_task(idle, task, *transport, internal.budgets);
    c.expect(capped.steps_used == 40 && capped.termination == Termination::steps_limit_reached, "40-step cap enforced");

    // The wall-clock rule, exercised with a scaled budget.
    IdleAgent slow(std::chrono::milliseconds(20));
    const RolloutRecord timed = run_task(slow, task, *transport, Budgets{40, std::chrono::milliseconds(60)});
    c.expect(timed.termination == Termination::time_limit_reached, "wall clock enforced");

    // Three repeats with SEM per bundle.
    const ShopBundle bundle = fixture_shop("tiny");
    const BenchmarkFile file = assemble_benchmark(bundle, generate_short_tasks(bundle), {});
    Storefront tiny(bundle);
    auto tiny_transport = make_storefront_transport(tiny);
    auto rules = make_rules_judge();
    const BenchResult result = run_benchmark(file, *tiny_transport, make_scripted_agent, *rules, BenchOptions{});
    c.expect(result.cells.size() == 3 * file.tasks.size(), "three cells per task");
    const json doc = to_json(result, BenchOptions{});
    c.expect(doc["bundles"]["easy_short_horizon"]["repeats"] == 3 && doc["bundles"]["easy_short_horizon"].contains("sem"),
             "bundle reports repeats and sem");
    c.expect(std::abs(standard_error({1.0, 0.0, 1.0}) - 1.0 / 3.0) <= kFloatTolerance, "sem formula");

    // Forced failure: every non-agent_end rollout fails even under an always-yes judge.
    auto yes = make_stub_judge();
    int forced = 0;
    std::vector<RolloutRecord> rollouts{capped, timed};
    CrashingAgent crash;
    rollouts.push_back(run_task(crash, task, *transport, internal.budgets));
    for (int steps = 0; steps < 5; ++steps) {
        IdleAgent a;
        rollouts.push_back(run_task(a, task, *transport, Budgets{steps, std::nullopt}));
    }
    for (const auto& r : rollouts) {
        if (r.termination == Termination::agent_end) continue;
        for (GateMode mode : {GateMode::soft_url, GateMode::hard_url}) {
            ++forced;
            c.expect(!gate_and_judge(r, task, *yes, mode).success, "non-agent_end rollout passed");
        }
    }
    c.expect(forced == 16, "forced-failure sample size " + std::to_string(forced));
}

void analyzer_equivalence(Check& c) {
    auto base = [](std::string r) { return UIState{std::move(r), std::string(kBaseConfig)}; };
    const UIState nav{"/", "navigation_open"};
    auto fetcher = make_static_fetcher(t::five_page_site());
    const TransitionGraph g = crawl(*fetcher).graph;
    const std::set<UIState> nodes(g.nodes.begin(), g.nodes.end());
    c.expect(nodes == std::set<UIState>{base("/"), nav, base("/a"), base("/b"), base("/c"), base("/d"), base("/missing")},
             "hand-drawn node set");
    const std::set<Edge> expected{
        {nav, base("/a"), "click:/a"},          {nav, base("/b"), "click:/b"},          {base("/"), base("/c"), "click:/c"},
        {base("/"), nav, "open:navigation"},    {nav, base("/"), "close:navigation"},   {base("/a"), base("/"), "click:/"},
        {base("/a"), base("/b"), "click:/b"},   {base("/b"), base("/d"), "click:/d"},   {base("/c"), base("/a"), "click:/a"},
        {base("/d"), base("/missing"), "click:/missing"},
    };
    c.expect(std::set<Edge>(g.edges.begin(), g.edges.end()) == expected && g.edges.size() == expected.size(),
             "hand-drawn edge set");
    const std::map<UIState, std::size_t> degrees{{base("/"), 2}, {nav, 3},       {base("/a"), 2},      {base("/b"), 1},
                                                 {base("/c"), 1}, {base("/d"), 1}, {base("/missing"), 0}};
    for (const auto& [state, degree] : degrees) c.expect(g.out_degree(state) == degree, "out-degree of " + state.label());

    auto degree_identity = [&](const TransitionGraph& graph, const std::string& what) {
        std::size_t sum = 0;
        for (const auto& n : graph.nodes) sum += graph.out_degree(n);
        c.expect(sum == graph.edges.size(), "degree identity on " + what);
    };
    degree_identity(g, "hand-drawn site");
    for (const auto& name : fixture_names()) {
        const ShopBundle bundle = fixture_shop(name);
        Storefront sf(bundle);
        auto shop_fetcher = make_storefront_fetcher(sf);
        for (bool collapse : {false, true}) {
            CrawlLimits limits;
            limits.collapse_routes = collapse;
            const CrawlResult r = crawl(*shop_fetcher, limits);
            degree_identity(r.graph, name);
            if (collapse) continue;
            std::set<std::string> routes;
            std::size_t surfaces = 0;
            for (const auto& n : r.graph.nodes) n.config == kBaseConfig ? (void)routes.insert(n.route) : (void)++surfaces;
            const auto table = t::expected_routes(bundle);
            c.expect(routes == table, name + " crawled routes differ from the route table");
            c.expect(surfaces == 3 * table.size() + 2 * bundle.collections().size(), name + " surface state count");
        }
    }
}

void schema_round_trips(Check& c) {
    const json caps = parse_json_lenient(t::slurp(t::data_dir() / "cookware_capabilities.json"));
    c.expect(json(capabilities_from_json(caps)) == caps, "capabilities document");
    const json stats = parse_json_lenient(t::slurp(t::data_dir() / "cookware_stats.json"));
    c.expect(json(stats_from_json(stats)) == stats, "stats document");
    for (const char* name : {"filter_task.json", "policy_task.json", "journey_task.json", "detour_task.json"}) {
        const json doc = parse_json_lenient(t::slurp(t::data_dir() / name));
        const json once = json(task_from_json(doc));
        c.expect(once == doc && json(task_from_json(once)) == doc, name);
    }
}

struct Criterion {
    const char* name;
    std::chrono::milliseconds limit;
    std::function<void(Check&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"validator-table-conformance", kValidatorLimit, validator_conformance},
        {"generator-groundedness", kGeneratorLimit, generator_groundedness},
        {"polish-loop-contract", kPolishLimit, polish_loop},
        {"storefront-contract", kStorefrontLimit, storefront_contract},
        {"end-to-end-groundedness", kEndToEndLimit, end_to_end},
        {"harness-protocol-constants", kHarnessLimit, harness_constants},
        {"analyzer-oracle-equivalence", kAnalyzerLimit, analyzer_equivalence},
        {"schema-round-trips", kSchemaLimit, schema_round_trips},
    };
    int failed = 0;
    for (const auto& criterion : criteria) {
        Check check;
        const auto start = Clock::now();
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
        const bool in_time = ms <= criterion.limit;
        const bool pass = check.failures() == 0 && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s  %-30s %6lld ms (limit %lld ms)  %d/%d checks", pass ? "PASS" : "FAIL", criterion.name,
                    static_cast<long long>(ms.count()), static_cast<long long>(criterion.limit.count()),
                    check.total() - check.failures(), check.total());
        if (check.failures()) std::printf("  first failure: %s", check.first().c_str());
        if (!in_time) std::printf("  over time limit");
        std::printf("\n");
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
