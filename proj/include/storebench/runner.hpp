#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "storebench/browser.hpp"
#include "storebench/task.hpp"

namespace storebench {

// ---------------------------------------------------------------------------
// Actions and agents

enum class ActionKind { goto_url, click, fill, select_option, check, go_back, noop, end };

std::string_view action_kind_name(ActionKind kind);
std::optional<ActionKind> parse_action_kind(std::string_view name);

struct Action {
    ActionKind kind = ActionKind::noop;
    /// Element id ("elem-N") or, for goto, a URL.
    std::string target;
    /// Text for fill, option value for select, infeasibility note for end.
    std::string value;
    std::string instruction;
    /// Appended to the rollout's memory log.
    std::string memory;
};

nlohmann::json to_json(const Action& action);
/// Throws std::invalid_argument on an unknown action or missing field.
Action action_from_json(const nlohmann::json& j);

class Agent {
public:
    virtual ~Agent() = default;
    virtual Action next(const Task& task, const Observation& observation) = 0;
};

/// Builds a fresh agent for each rollout.
using AgentFactory = std::function<std::unique_ptr<Agent>()>;

/// Deterministic reference policy for the deterministic skills; declares journeys infeasible.
std::unique_ptr<Agent> make_scripted_agent();
/// Runs `command` per step with {task, observation} JSON on stdin; stdout is one action object.
std::unique_ptr<Agent> make_process_agent(std::string command, std::chrono::milliseconds timeout);

/// Skill the scripted agent would apply: search-exact, search-substitute, browse, filter,
/// policy, or empty for anything it cannot solve.
std::string scripted_skill(const Task& task);

// ---------------------------------------------------------------------------
// Rollouts

enum class Termination { agent_end, steps_limit_reached, time_limit_reached };
std::string_view termination_name(Termination t);

struct ActionRecord {
    int step = 0;
    std::string instruction;
    std::string method;
    std::string target;
    std::string outcome;
};

struct RolloutRecord {
    std::string task_id;
    std::vector<std::string> urls_visited;
    std::vector<ActionRecord> actions;
    std::vector<std::string> memory_log;
    std::vector<CartState> cart_snapshots;
    Termination termination = Termination::steps_limit_reached;
    int steps_used = 0;
    std::int64_t wall_clock_ms = 0;
    /// Set when the agent adapter failed.
    std::optional<std::string> crash;
    /// Set when the agent declared the task infeasible.
    std::optional<std::string> note;

    CartState final_cart() const { return cart_snapshots.empty() ? CartState{} : cart_snapshots.back(); }
};

nlohmann::json to_json(const RolloutRecord& rollout);

struct Budgets {
    int max_steps = 40;
    /// No limit when absent.
    std::optional<std::chrono::milliseconds> max_wall_clock;
};

class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Drives one episode from the storefront's home page. The caller resets the environment first.
/// Throws RunError when the environment cannot be reached.
RolloutRecord run_task(Agent& agent, const Task& task, Transport& transport, const Budgets& budgets);

/// POST /__reset?scope=all.
void reset_environment(Transport& transport);

// ---------------------------------------------------------------------------
// Judging

enum class GateMode { soft_url, hard_url };
std::string_view gate_mode_name(GateMode mode);

struct JudgeInput {
    Task task;
    std::vector<std::string> memory_log;
    std::vector<std::string> urls;
    Termination termination = Termination::agent_end;
    std::vector<CartState> cart_snapshots;
};

nlohmann::json to_json(const JudgeInput& input);

struct JudgeResult {
    bool success = false;
    std::string reasoning;
};

class Judge {
public:
    virtual ~Judge() = default;
    virtual JudgeResult judge(const JudgeInput& input) = 0;
};

/// Always reports success.
std::unique_ptr<Judge> make_stub_judge();
/// Checks the final cart and trajectory against the criteria type.
std::unique_ptr<Judge> make_rules_judge();
/// Runs `command` with to_json(input) on stdin; expects {"success": bool, "reasoning": string}.
std::unique_ptr<Judge> make_process_judge(std::string command, std::chrono::milliseconds timeout);

struct Verdict {
    std::string task_id;
    bool success = false;
    std::string reasoning;
    /// True when a hard rule decided the verdict instead of the judge.
    bool gated = false;
};

nlohmann::json to_json(const Verdict& verdict);

/// True when some visited path contains url_contains or any url_contains_alt entry.
bool url_gate_passes(const std::vector<std::string>& urls, const Task& task);

Verdict gate_and_judge(const RolloutRecord& rollout, const Task& task, Judge& judge, GateMode mode);

// ---------------------------------------------------------------------------
// Profiles and aggregation

struct Profile {
    std::string name;
    Budgets budgets;
    GateMode mode = GateMode::soft_url;
};

inline constexpr int kDefaultRepeats = 3;
inline constexpr int kBrowsergymMaxSteps = 30;
inline constexpr int kInternalMaxSteps = 40;
inline constexpr std::chrono::seconds kInternalWallClock{850};

Profile browsergym_profile();
Profile internal_profile();
/// Throws std::invalid_argument for unknown names.
Profile profile_by_name(std::string_view name);

struct CellVerdict {
    std::string task_id;
    int repeat = 0;
    Verdict verdict;
};

struct TaskAggregate {
    std::string task_id;
    std::string bundle;
    double mean = 0;
    double sem = 0;
    int repeats = 0;
};

struct BundleAggregate {
    std::string bundle;
    /// Passes over all cells in the bundle.
    double pass_rate = 0;
    /// Sample standard deviation of the per-repeat pass rates over sqrt(repeats).
    double sem = 0;
    int tasks = 0;
    int repeats = 0;
    int cells = 0;
};

struct AggregateReport {
    std::vector<TaskAggregate> tasks;
    std::map<std::string, BundleAggregate> bundles;
};

nlohmann::json to_json(const AggregateReport& report);
std::string render_table(const AggregateReport& report);

/// Sample standard deviation over sqrt(n); zero for fewer than two values.
double standard_error(const std::vector<double>& values);

/// Groups by task and bundle. Tasks missing from every bundle list fall under "untagged".
AggregateReport aggregate(const std::vector<CellVerdict>& cells, const BenchmarkFile& file);

struct BenchOptions {
    Profile profile = internal_profile();
    int repeats = kDefaultRepeats;
    /// Reset the whole environment before every cell.
    bool reset_between = true;
};

struct BenchResult {
    std::vector<CellVerdict> cells;
    std::vector<RolloutRecord> rollouts;
    AggregateReport report;
};

nlohmann::json to_json(const BenchResult& result, const BenchOptions& options);

BenchResult run_benchmark(const BenchmarkFile& file, Transport& transport, const AgentFactory& agents, Judge& judge,
                          const BenchOptions& options);

}  // namespace storebench
