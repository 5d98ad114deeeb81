#pragma once

#include <chrono>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "storebench/catalog.hpp"
#include "storebench/task.hpp"
#include "storebench/validator.hpp"

namespace storebench {

class PromptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FewShotExample {
    std::string title;
    std::string intent;
    std::string criteria_type;
};

/// The eight reference journeys embedded in every user prompt.
const std::vector<FewShotExample>& few_shot_library();

/// The generator's fixed system prompt.
const std::string& journey_system_prompt();

struct PromptContext {
    std::string system_prompt;
    std::string user_prompt;
    std::vector<FewShotExample> few_shot;
};

struct PromptOptions {
    /// Rendered on the profile's Domain line.
    std::string domain = "http://127.0.0.1:8080";
};

/// One line per active product with at least one membership: "<handle> -> <collection>, <collection>".
std::vector<std::string> membership_lines(const ShopBundle& bundle);

/// Throws PromptError when count is zero or the bundle has no collections.
PromptContext build_prompt(const ShopBundle& bundle, std::size_t count, const PromptOptions& options = {});

/// Shop context plus only the flagged tasks and their issues; asks for the same ids back.
std::string build_polish_prompt(const ShopBundle& bundle, const std::vector<Task>& flagged,
                                const std::vector<Issue>& issues, const PromptOptions& options = {});

// ---------------------------------------------------------------------------
// Generator interface

enum class GenerationMode { initial, polish, retry };
std::string_view generation_mode_name(GenerationMode mode);

struct GenerationRequest {
    std::string system;
    std::string user;
    GenerationMode mode = GenerationMode::initial;
    /// Tasks the reply must cover: all ids for the initial pass, the flagged ids for polish.
    std::vector<std::string> expected_ids;
    std::size_t count = 0;
    std::string shop_slug;
};

nlohmann::json to_json(const GenerationRequest& request);

class GeneratorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A single synchronous prompt-in, text-out call.
class TextGenerator {
public:
    virtual ~TextGenerator() = default;
    virtual std::string complete(const GenerationRequest& request, std::chrono::milliseconds timeout) = 0;
};

/// Offline generators over a known bundle.
/// "stub" writes grounded journeys; "stub-polish" plants one unknown product per
/// odd-numbered task on the initial pass and fixes it when polished; "stub-stubborn"
/// never fixes it.
std::unique_ptr<TextGenerator> make_stub_generator(std::string_view name, const ShopBundle& bundle);
bool is_stub_generator_name(std::string_view name);

/// Runs `command` per call with to_json(request) on stdin; stdout is the completion.
std::unique_ptr<TextGenerator> make_process_generator(std::string command);

/// Id format for journeys, counted from 1.
std::string journey_id(const std::string& shop_slug, std::size_t index);

// ---------------------------------------------------------------------------
// Orchestration

class MergeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Id-keyed replacement preserving the original order. Throws MergeError when a
/// regenerated id is not flagged or appears twice.
std::vector<Task> merge_regenerated(const std::vector<Task>& original, const std::vector<Task>& regenerated,
                                    const std::set<std::string>& flagged_ids);

inline constexpr int kMaxPolishRounds = 2;
inline constexpr int kHaltExitCode = 3;

struct GenerationRound {
    int round_index = 0;
    std::vector<Task> candidate_tasks;
    std::vector<Issue> issues;
    std::set<std::string> flagged_ids;
    /// Regenerated tasks that did not match a flagged id.
    std::vector<std::string> rejected_ids;
};

struct JourneyOptions {
    std::chrono::milliseconds timeout{std::chrono::seconds(120)};
    PromptOptions prompt;
};

struct JourneyResult {
    std::vector<Task> tasks;
    int rounds_used = 0;
    /// 0 when the tasks may be emitted, kHaltExitCode otherwise.
    int exit_code = 0;
    std::string halt_reason;
    std::vector<GenerationRound> rounds;
    /// Content calls plus parse retries.
    int generator_calls = 0;

    bool halted() const { return exit_code != 0; }
};

JourneyResult generate_journeys(TextGenerator& generator, const ShopBundle& bundle, std::size_t count,
                                const JourneyOptions& options = {});

/// Round-by-round issues, for the audit log.
nlohmann::json audit_log(const JourneyResult& result);

/// Extracts the "tasks" array from a completion. Accepts surrounding prose and code fences.
/// Throws TaskSchemaError on anything unusable.
std::vector<Task> parse_generated_tasks(std::string_view completion);

}  // namespace storebench
