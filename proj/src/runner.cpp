#include "storebench/runner.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "storebench/catalog.hpp"
#include "storebench/process.hpp"
#include "storebench/validator.hpp"

namespace storebench {

using nlohmann::json;

std::string_view termination_name(Termination t) {
    switch (t) {
        case Termination::agent_end: return "agent_end";
        case Termination::steps_limit_reached: return "steps_limit_reached";
        case Termination::time_limit_reached: return "time_limit_reached";
    }
    return "agent_end";
}

std::string_view gate_mode_name(GateMode mode) { return mode == GateMode::hard_url ? "hard_url" : "soft_url"; }

json to_json(const RolloutRecord& r) {
    json actions = json::array();
    for (const auto& a : r.actions) {
        actions.push_back(json{{"step", a.step}, {"instruction", a.instruction}, {"method", a.method},
                               {"target", a.target}, {"outcome", a.outcome}});
    }
    json j{{"task_id", r.task_id},
           {"urls_visited", r.urls_visited},
           {"actions", actions},
           {"memory_log", r.memory_log},
           {"cart_snapshots", r.cart_snapshots},
           {"termination", termination_name(r.termination)},
           {"steps_used", r.steps_used},
           {"wall_clock_ms", r.wall_clock_ms}};
    if (r.crash) j["crash"] = *r.crash;
    if (r.note) j["note"] = *r.note;
    return j;
}

void reset_environment(Transport& transport) {
    try {
        const Response r = transport.send(Request{"POST", "/__reset?scope=all", {}, {}, {}});
        if (r.status != 200) throw RunError("environment reset failed with HTTP " + std::to_string(r.status));
    } catch (const TransportError& e) {
        throw RunError(e.what());
    }
}

RolloutRecord run_task(Agent& agent, const Task& task, Transport& transport, const Budgets& budgets) {
    RolloutRecord rec;
    rec.task_id = task.id;
    const auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    };
    Browser browser(transport);
    try {
        browser.goto_url("/");
        rec.termination = Termination::steps_limit_reached;
        for (;;) {
            if (rec.steps_used >= budgets.max_steps) {
                rec.termination = Termination::steps_limit_reached;
                break;
            }
            if (budgets.max_wall_clock && elapsed() >= *budgets.max_wall_clock) {
                rec.termination = Termination::time_limit_reached;
                break;
            }
            const int step = rec.steps_used + 1;
            Action action;
            try {
                action = agent.next(task, browser.observation(step, rec.memory_log));
            } catch (const TransportError&) {
                throw;
            } catch (const std::exception& e) {
                // A crashed adapter is scored like a timeout.
                rec.crash = e.what();
                rec.termination = Termination::time_limit_reached;
                break;
            }
            rec.steps_used = step;
            std::string outcome;
            switch (action.kind) {
                case ActionKind::goto_url: outcome = browser.goto_url(action.target); break;
                case ActionKind::click: outcome = browser.click(action.target); break;
                case ActionKind::fill: outcome = browser.fill(action.target, action.value); break;
                case ActionKind::select_option: outcome = browser.select_option(action.target, action.value); break;
                case ActionKind::check: outcome = browser.check(action.target); break;
                case ActionKind::go_back: outcome = browser.go_back(); break;
                case ActionKind::noop: outcome = "no-op"; break;
                case ActionKind::end: outcome = action.value.empty() ? "ended" : action.value; break;
            }
            rec.actions.push_back(ActionRecord{step, action.instruction, std::string(action_kind_name(action.kind)),
                                               action.target, outcome});
            rec.memory_log.push_back(action.memory.empty() ? action.instruction : action.memory);
            rec.cart_snapshots.push_back(browser.cart());
            if (action.kind == ActionKind::end) {
                rec.termination = Termination::agent_end;
                if (!action.value.empty()) rec.note = action.value;
                break;
            }
        }
    } catch (const TransportError& e) {
        throw RunError(e.what());
    }
    rec.urls_visited = browser.visited();
    rec.wall_clock_ms = elapsed().count();
    return rec;
}

// ---------------------------------------------------------------------------
// Judges

json to_json(const JudgeInput& in) {
    return json{{"intent", in.task.intent},
                {"success_criteria", json(in.task)["success_criteria"]},
                {"url_contains_alt", in.task.url_contains_alt.value_or(std::vector<std::string>{})},
                {"memory_log", in.memory_log},
                {"urls", in.urls},
                {"termination", termination_name(in.termination)},
                {"cart_snapshots", in.cart_snapshots}};
}

bool url_gate_passes(const std::vector<std::string>& urls, const Task& task) {
    const auto hints = task.url_hints();
    if (hints.empty()) return true;
    for (const auto& url : urls) {
        for (const auto& hint : hints) {
            if (url.find(hint) != std::string::npos) return true;
        }
    }
    return false;
}

namespace {

class StubJudge : public Judge {
public:
    JudgeResult judge(const JudgeInput&) override { return {true, "stub judge accepts every rollout"}; }
};

bool same_product_title(const std::string& line_title, const std::string& title) {
    return iequals(line_title, title) ||
           (line_title.size() > title.size() + 2 && iequals(line_title.substr(0, title.size() + 2), title + " -"));
}

class RulesJudge : public Judge {
public:
    JudgeResult judge(const JudgeInput& in) override {
        const CartState cart = in.cart_snapshots.empty() ? CartState{} : in.cart_snapshots.back();
        const Task& task = in.task;
        const std::string& type = task.success_criteria.type;
        const bool visited = url_gate_passes(in.urls, task);
        if (type == "cart_exact") {
            const auto handle = handle_in_hint(task.success_criteria.url_contains.value_or(""), "products");
            for (const auto& line : cart.lines) {
                if (handle && line.product_handle == *handle) return {true, "cart holds " + line.title};
            }
            return {false, "the requested product is not in the final cart"};
        }
        if (type == "cart_substitute") {
            const auto open = task.intent.find('"');
            const auto close = open == std::string::npos ? open : task.intent.find('"', open + 1);
            const std::string original = close == std::string::npos ? "" : task.intent.substr(open + 1, close - open - 1);
            for (const auto& line : cart.lines) {
                if (!same_product_title(line.title, original)) return {true, "cart holds alternative " + line.title};
            }
            return {false, cart.lines.empty() ? "final cart is empty" : "cart holds only the original product"};
        }
        if (type == "page_navigation") {
            return visited ? JudgeResult{true, "visited the target page"} : JudgeResult{false, "target page never visited"};
        }
        if (type == "navigation") {
            if (!visited) return {false, "target collection never visited"};
            if (auto facet = task_facet(task)) {
                const std::string key = "filter." + facet->dimension;
                for (const auto& url : in.urls) {
                    const auto [path, query] = split_target(url);
                    const auto value = query_value(parse_query(query), key);
                    if (value && iequals(*value, facet->value) && url_gate_passes({path}, task)) {
                        return {true, "applied " + facet->dimension + "=" + facet->value};
                    }
                }
                return {false, "the requested filter was never applied"};
            }
            return cart.lines.empty() ? JudgeResult{false, "final cart is empty"} : JudgeResult{true, "visited and added"};
        }
        if (type.rfind("cart", 0) == 0) {
            if (cart.lines.empty()) return {false, "final cart is empty"};
            return visited ? JudgeResult{true, "cart non-empty and hint visited"} : JudgeResult{false, "hint never visited"};
        }
        return visited ? JudgeResult{true, "hint visited"} : JudgeResult{false, "hint never visited"};
    }
};

class ProcessJudge : public Judge {
public:
    ProcessJudge(std::string command, std::chrono::milliseconds timeout) : command_(std::move(command)), timeout_(timeout) {}

    JudgeResult judge(const JudgeInput& in) override {
        const ProcessResult r = run_process(command_, to_json(in).dump(), timeout_);
        if (r.timed_out) throw std::runtime_error("judge timed out");
        if (r.exit_code != 0) throw std::runtime_error("judge exited with code " + std::to_string(r.exit_code));
        const json out = json::parse(r.out);
        if (!out.is_object() || !out.contains("success") || !out["success"].is_boolean()) {
            throw std::runtime_error("judge output lacks a boolean \"success\"");
        }
        return {out["success"].get<bool>(), out.value("reasoning", std::string())};
    }

private:
    std::string command_;
    std::chrono::milliseconds timeout_;
};

}  // namespace

std::unique_ptr<Judge> make_stub_judge() { return std::make_unique<StubJudge>(); }
std::unique_ptr<Judge> make_rules_judge() { return std::make_unique<RulesJudge>(); }
std::unique_ptr<Judge> make_process_judge(std::string command, std::chrono::milliseconds timeout) {
    return std::make_unique<ProcessJudge>(std::move(command), timeout);
}

json to_json(const Verdict& v) {
    return json{{"task_id", v.task_id}, {"success", v.success}, {"reasoning", v.reasoning}, {"gated", v.gated}};
}

Verdict gate_and_judge(const RolloutRecord& rollout, const Task& task, Judge& judge, GateMode mode) {
    Verdict v;
    v.task_id = task.id;
    if (rollout.termination != Termination::agent_end) {
        v.gated = true;
        v.reasoning = "forced failure: rollout ended with " + std::string(termination_name(rollout.termination));
        return v;
    }
    if (mode == GateMode::hard_url && !url_gate_passes(rollout.urls_visited, task)) {
        v.gated = true;
        v.reasoning = "url gate: no visited path contains a url hint";
        return v;
    }
    try {
        const JudgeResult r = judge.judge(JudgeInput{task, rollout.memory_log, rollout.urls_visited, rollout.termination,
                                                     rollout.cart_snapshots});
        v.success = r.success;
        v.reasoning = r.reasoning;
    } catch (const std::exception& e) {
        v.success = false;
        v.gated = true;
        v.reasoning = std::string("judge unavailable: ") + e.what();
    }
    return v;
}

// ---------------------------------------------------------------------------
// Profiles

Profile browsergym_profile() { return Profile{"browsergym", Budgets{kBrowsergymMaxSteps, std::nullopt}, GateMode::hard_url}; }

Profile internal_profile() {
    return Profile{"internal", Budgets{kInternalMaxSteps, std::chrono::milliseconds(kInternalWallClock)}, GateMode::soft_url};
}

Profile profile_by_name(std::string_view name) {
    if (name == "browsergym") return browsergym_profile();
    if (name == "internal") return internal_profile();
    throw std::invalid_argument("unknown profile '" + std::string(name) + "' (expected browsergym or internal)");
}

// ---------------------------------------------------------------------------
// Aggregation

double standard_error(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

namespace {

std::string bundle_of(const std::string& id, const BenchmarkFile& file) {
    auto listed = [&](const std::vector<std::string>& ids) { return std::find(ids.begin(), ids.end(), id) != ids.end(); };
    if (listed(file.easy_short_horizon)) return "easy_short_horizon";
    if (listed(file.hard_long_horizon)) return "hard_long_horizon";
    if (const Task* t = file.find(id); t && t->bundle_tag) return std::string(bundle_tag_name(*t->bundle_tag));
    return "untagged";
}

}  // namespace

AggregateReport aggregate(const std::vector<CellVerdict>& cells, const BenchmarkFile& file) {
    // task id -> repeat -> success, in first-seen task order
    std::vector<std::string> order;
    std::map<std::string, std::map<int, bool>> grid;
    for (const auto& c : cells) {
        if (!grid.count(c.task_id)) order.push_back(c.task_id);
        grid[c.task_id][c.repeat] = c.verdict.success;
    }
    AggregateReport report;
    std::map<std::string, std::map<int, std::pair<int, int>>> per_repeat;  // bundle -> repeat -> (passes, cells)
    for (const auto& id : order) {
        TaskAggregate t;
        t.task_id = id;
        t.bundle = bundle_of(id, file);
        std::vector<double> outcomes;
        for (const auto& [repeat, success] : grid[id]) {
            outcomes.push_back(success ? 1.0 : 0.0);
            auto& slot = per_repeat[t.bundle][repeat];
            slot.first += success ? 1 : 0;
            slot.second += 1;
        }
        t.repeats = static_cast<int>(outcomes.size());
        t.mean = std::accumulate(outcomes.begin(), outcomes.end(), 0.0) / static_cast<double>(outcomes.size());
        t.sem = standard_error(outcomes);
        BundleAggregate& b = report.bundles[t.bundle];
        b.bundle = t.bundle;
        b.tasks += 1;
        report.tasks.push_back(std::move(t));
    }
    for (auto& [name, b] : report.bundles) {
        std::vector<double> rates;
        int passes = 0;
        for (const auto& [repeat, slot] : per_repeat[name]) {
            rates.push_back(static_cast<double>(slot.first) / static_cast<double>(slot.second));
            passes += slot.first;
            b.cells += slot.second;
        }
        b.repeats = static_cast<int>(rates.size());
        b.pass_rate = b.cells ? static_cast<double>(passes) / static_cast<double>(b.cells) : 0.0;
        b.sem = standard_error(rates);
    }
    return report;
}

json to_json(const AggregateReport& report) {
    json tasks = json::array();
    for (const auto& t : report.tasks) {
        tasks.push_back(json{{"task_id", t.task_id}, {"bundle", t.bundle}, {"mean", t.mean}, {"sem", t.sem}, {"repeats", t.repeats}});
    }
    json bundles = json::object();
    for (const auto& [name, b] : report.bundles) {
        bundles[name] = json{{"pass_rate", b.pass_rate}, {"sem", b.sem}, {"tasks", b.tasks}, {"repeats", b.repeats}, {"cells", b.cells}};
    }
    return json{{"tasks", tasks}, {"bundles", bundles}};
}

std::string render_table(const AggregateReport& report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-22s %6s %9s %7s %8s\n", "bundle", "tasks", "pass_rate", "sem", "repeats");
    out << line;
    for (const auto& [name, b] : report.bundles) {
        std::snprintf(line, sizeof line, "%-22s %6d %9.3f %7.3f %8d\n", name.c_str(), b.tasks, b.pass_rate, b.sem, b.repeats);
        out << line;
    }
    return out.str();
}

json to_json(const BenchResult& result, const BenchOptions& options) {
    json cells = json::array();
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const auto& c = result.cells[i];
        json cell{{"task_id", c.task_id}, {"repeat", c.repeat}, {"verdict", to_json(c.verdict)}};
        if (i < result.rollouts.size()) {
            const auto& r = result.rollouts[i];
            cell["termination"] = termination_name(r.termination);
            cell["steps_used"] = r.steps_used;
            cell["wall_clock_ms"] = r.wall_clock_ms;
            cell["urls_visited"] = r.urls_visited;
            if (r.note) cell["note"] = *r.note;
            if (r.crash) cell["crash"] = *r.crash;
        }
        cells.push_back(std::move(cell));
    }
    json profile{{"name", options.profile.name},
                 {"max_steps", options.profile.budgets.max_steps},
                 {"mode", gate_mode_name(options.profile.mode)}};
    profile["max_wall_clock_s"] = options.profile.budgets.max_wall_clock
                                      ? json(options.profile.budgets.max_wall_clock->count() / 1000.0)
                                      : json(nullptr);
    json out = to_json(result.report);
    out["profile"] = profile;
    out["repeats"] = options.repeats;
    out["cells"] = cells;
    return out;
}

BenchResult run_benchmark(const BenchmarkFile& file, Transport& transport, const AgentFactory& agents, Judge& judge,
                          const BenchOptions& options) {
    if (options.repeats < 1) throw std::invalid_argument("repeats must be at least 1");
    BenchResult result;
    for (const auto& task : file.tasks) {
        for (int repeat = 1; repeat <= options.repeats; ++repeat) {
            if (options.reset_between) reset_environment(transport);
            auto agent = agents();
            RolloutRecord rollout = run_task(*agent, task, transport, options.profile.budgets);
            result.cells.push_back(CellVerdict{task.id, repeat, gate_and_judge(rollout, task, judge, options.profile.mode)});
            result.rollouts.push_back(std::move(rollout));
        }
    }
    result.report = aggregate(result.cells, file);
    return result;
}

}  // namespace storebench
