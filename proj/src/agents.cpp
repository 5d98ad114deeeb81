#include <regex>

#include "storebench/catalog.hpp"
#include "storebench/process.hpp"
#include "storebench/runner.hpp"
#include "storebench/validator.hpp"

namespace storebench {

using nlohmann::json;

std::string_view action_kind_name(ActionKind kind) {
    switch (kind) {
        case ActionKind::goto_url: return "goto";
        case ActionKind::click: return "click";
        case ActionKind::fill: return "fill";
        case ActionKind::select_option: return "select_option";
        case ActionKind::check: return "check";
        case ActionKind::go_back: return "go_back";
        case ActionKind::noop: return "noop";
        case ActionKind::end: return "end";
    }
    return "noop";
}

std::optional<ActionKind> parse_action_kind(std::string_view name) {
    for (auto kind : {ActionKind::goto_url, ActionKind::click, ActionKind::fill, ActionKind::select_option,
                      ActionKind::check, ActionKind::go_back, ActionKind::noop, ActionKind::end}) {
        if (action_kind_name(kind) == name) return kind;
    }
    return std::nullopt;
}

json to_json(const Action& a) {
    json j{{"action", action_kind_name(a.kind)}};
    if (!a.target.empty()) j["target"] = a.target;
    if (!a.value.empty()) j["value"] = a.value;
    if (!a.instruction.empty()) j["instruction"] = a.instruction;
    if (!a.memory.empty()) j["memory"] = a.memory;
    return j;
}

Action action_from_json(const json& j) {
    if (!j.is_object() || !j.contains("action") || !j["action"].is_string()) {
        throw std::invalid_argument("action must be an object with a string \"action\"");
    }
    auto kind = parse_action_kind(j["action"].get<std::string>());
    if (!kind) throw std::invalid_argument("unknown action " + j["action"].get<std::string>());
    Action a;
    a.kind = *kind;
    auto text = [&](const char* key) { return j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : std::string(); };
    a.target = text("target");
    a.value = text("value");
    a.instruction = text("instruction");
    a.memory = text("memory");
    const bool needs_target = a.kind == ActionKind::goto_url || a.kind == ActionKind::click || a.kind == ActionKind::fill ||
                              a.kind == ActionKind::select_option || a.kind == ActionKind::check;
    if (needs_target && a.target.empty()) throw std::invalid_argument(std::string(action_kind_name(a.kind)) + " needs a target");
    return a;
}

std::string scripted_skill(const Task& task) {
    if (task.id.find("-e2e-v1-") != std::string::npos) return {};
    const std::string& type = task.success_criteria.type;
    if (type == "cart_exact") return "search-exact";
    if (type == "cart_substitute") return "search-substitute";
    if (type == "page_navigation") return "policy";
    if (type == "navigation") return task_facet(task) ? "filter" : "browse";
    return {};
}

namespace {

std::optional<std::string> first_quoted(const std::string& text) {
    const auto open = text.find('"');
    if (open == std::string::npos) return std::nullopt;
    const auto close = text.find('"', open + 1);
    if (close == std::string::npos) return std::nullopt;
    return text.substr(open + 1, close - open - 1);
}

using Predicate = std::function<bool(const HtmlNode&, const std::vector<const HtmlNode*>&)>;

/// Overlay id of the first interactive element matching `pred`.
std::optional<std::string> find_element(const HtmlNode& document, const Predicate& pred) {
    const auto overlay = overlay_elements(document);
    std::optional<std::string> found;
    walk_elements_with_ancestors(document, [&](const HtmlNode& node, const std::vector<const HtmlNode*>& ancestors) {
        if (found || !pred(node, ancestors)) return;
        for (std::size_t i = 0; i < overlay.size(); ++i) {
            if (overlay[i] == &node) {
                found = overlay_id(i);
                return;
            }
        }
    });
    return found;
}

const HtmlNode* enclosing_card(const std::vector<const HtmlNode*>& ancestors) {
    for (auto it = ancestors.rbegin(); it != ancestors.rend(); ++it) {
        if ((*it)->tag == "li" && (*it)->has_attr("data-sg-card")) return *it;
    }
    return nullptr;
}

bool inside(const std::vector<const HtmlNode*>& ancestors, const std::string& attribute) {
    return std::any_of(ancestors.begin(), ancestors.end(), [&](const HtmlNode* a) { return a->has_attr(attribute); });
}

/// Card links of purchasable products; `exclude_title` skips a product by its title.
Predicate available_card(std::optional<std::string> exclude_title = {}, std::optional<std::string> only_title = {}) {
    return [=](const HtmlNode& node, const std::vector<const HtmlNode*>& ancestors) {
        if (node.tag != "a") return false;
        const HtmlNode* card = enclosing_card(ancestors);
        if (!card || card->attr_or("data-sg-available") != "true") return false;
        const std::string title = node.text_content();
        if (exclude_title && iequals(title, *exclude_title)) return false;
        if (only_title && !iequals(title, *only_title)) return false;
        return true;
    };
}

bool is_add_button(const HtmlNode& node, const std::vector<const HtmlNode*>&) {
    return node.tag == "button" && node.has_attr("data-sg-add");
}

class ScriptedAgent : public Agent {
public:
    Action next(const Task& task, const Observation& obs) override {
        if (!started_) {
            started_ = true;
            skill_ = scripted_skill(task);
        }
        const HtmlNode document = parse_html(obs.html, HtmlMode::lenient);
        if (skill_ == "search-exact") return exact(task, document);
        if (skill_ == "search-substitute") return substitute(task, document);
        if (skill_ == "browse" || skill_ == "filter") return browse(task, document);
        if (skill_ == "policy") return policy(task, document);
        return end("infeasible: no scripted policy for criteria type '" + task.success_criteria.type + "'");
    }

private:
    static Action go(std::string url, std::string why) { return Action{ActionKind::goto_url, std::move(url), {}, std::move(why), {}}; }
    static Action press(std::string id, std::string why) { return Action{ActionKind::click, std::move(id), {}, std::move(why), {}}; }
    static Action end(std::string note = {}) { return Action{ActionKind::end, {}, std::move(note), "end the session", {}}; }

    Action add_to_cart(const HtmlNode& document) {
        phase_ = "done";
        if (auto add = find_element(document, is_add_button)) return press(*add, "add the selected variant to cart");
        return end("infeasible: product page has no add-to-cart button");
    }

    Action exact(const Task& task, const HtmlNode& document) {
        const std::string title = first_quoted(task.intent).value_or("");
        const std::string hint = task.success_criteria.url_contains.value_or("/");
        if (phase_.empty()) {
            phase_ = "pick";
            return go("/search?q=" + url_encode(title), "search for the product by title");
        }
        if (phase_ == "pick") {
            phase_ = "add";
            if (auto link = find_element(document, available_card({}, title))) return press(*link, "open the matching result");
            return go(hint, "open the product page directly");
        }
        if (phase_ == "add") return add_to_cart(document);
        return end();
    }

    Action substitute(const Task& task, const HtmlNode& document) {
        static const std::regex kind_pattern("Find a similar (.+?) and add");
        const std::string original = first_quoted(task.intent).value_or("");
        if (phase_.empty()) {
            std::smatch m;
            const std::string kind = std::regex_search(task.intent, m, kind_pattern) ? m[1].str() : original;
            phase_ = "pick";
            return go("/search?q=" + url_encode(kind), "search for similar products");
        }
        if (phase_ == "pick" || phase_ == "recommendations" || phase_ == "home") {
            if (auto link = find_element(document, available_card(original))) {
                phase_ = "add";
                return press(*link, "open an alternative product");
            }
            if (phase_ == "pick") {
                phase_ = "open-original";
                return go("/search?q=" + url_encode(original), "find the original to see its recommendations");
            }
            if (phase_ == "recommendations") {
                phase_ = "home";
                return go("/", "look for alternatives on the home page");
            }
            return end("infeasible: no alternative product is available");
        }
        if (phase_ == "open-original") {
            if (auto link = find_element(document, available_card({}, original))) {
                phase_ = "recommendations";
                return press(*link, "open the original product");
            }
            phase_ = "home";
            return go("/", "look for alternatives on the home page");
        }
        if (phase_ == "add") return add_to_cart(document);
        return end();
    }

    Action browse(const Task& task, const HtmlNode& document) {
        const std::string hint = task.success_criteria.url_contains.value_or("/");
        if (phase_.empty()) {
            phase_ = "pick";
            if (skill_ == "filter") {
                if (auto facet = task_facet(task)) {
                    return go(hint + "?" + build_query({{"filter." + facet->dimension, facet->value}}), "apply the filter");
                }
            }
            return go(hint, "open the collection");
        }
        if (phase_ == "pick") {
            phase_ = "add";
            if (auto link = find_element(document, available_card())) return press(*link, "open the first available product");
            return end(skill_ == "filter" ? "" : "infeasible: collection shows no available product");
        }
        if (phase_ == "add") return add_to_cart(document);
        return end();
    }

    Action policy(const Task& task, const HtmlNode& document) {
        const auto hints = task.url_hints();
        if (phase_.empty()) {
            phase_ = "find";
            return go("/", "start from the home page");
        }
        if (phase_ == "find") {
            phase_ = "done";
            auto matches_hint = [&](const HtmlNode& node) {
                if (node.tag != "a") return false;
                const std::string href = decode_entities(node.attr_or("href"));
                return std::any_of(hints.begin(), hints.end(), [&](const std::string& h) { return href.find(h) != std::string::npos; });
            };
            auto in_footer = find_element(document, [&](const HtmlNode& node, const std::vector<const HtmlNode*>& ancestors) {
                return matches_hint(node) && inside(ancestors, "data-sg-footer");
            });
            if (in_footer) return press(*in_footer, "open the policy link in the footer");
            if (auto any = find_element(document, [&](const HtmlNode& node, const auto&) { return matches_hint(node); })) {
                return press(*any, "open the policy link");
            }
            return go(hints.empty() ? "/" : hints.front(), "open the policy route directly");
        }
        return end();
    }

    bool started_ = false;
    std::string skill_;
    std::string phase_;
};

class ProcessAgent : public Agent {
public:
    ProcessAgent(std::string command, std::chrono::milliseconds timeout) : command_(std::move(command)), timeout_(timeout) {}

    Action next(const Task& task, const Observation& obs) override {
        const json input{{"task", task}, {"observation", obs}};
        const ProcessResult r = run_process(command_, input.dump(), timeout_);
        if (r.timed_out) throw std::runtime_error("agent timed out");
        if (r.exit_code != 0) throw std::runtime_error("agent exited with code " + std::to_string(r.exit_code) + ": " + r.err);
        try {
            return action_from_json(json::parse(r.out));
        } catch (const json::parse_error& e) {
            throw std::runtime_error(std::string("agent output is not JSON: ") + e.what());
        }
    }

private:
    std::string command_;
    std::chrono::milliseconds timeout_;
};

}  // namespace

std::unique_ptr<Agent> make_scripted_agent() { return std::make_unique<ScriptedAgent>(); }

std::unique_ptr<Agent> make_process_agent(std::string command, std::chrono::milliseconds timeout) {
    return std::make_unique<ProcessAgent>(std::move(command), timeout);
}

}  // namespace storebench
