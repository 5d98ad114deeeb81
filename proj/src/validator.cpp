#include "storebench/validator.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace storebench {

using nlohmann::json;

std::string_view rule_name(Rule rule) {
    switch (rule) {
        case Rule::unknown_collection: return "unknown-collection";
        case Rule::unknown_product: return "unknown-product";
        case Rule::infeasible_filter: return "infeasible-filter";
        case Rule::intent_answer_leak: return "intent-answer-leak";
        case Rule::option_mismatch: return "option-mismatch";
        case Rule::product_not_in_collection: return "product-not-in-collection";
        case Rule::unknown_page: return "unknown-page";
    }
    return "unknown";
}

std::optional<Rule> parse_rule(std::string_view name) {
    for (Rule rule : kAllRules) {
        if (rule_name(rule) == name) return rule;
    }
    return std::nullopt;
}

Severity rule_severity(Rule rule) {
    switch (rule) {
        case Rule::unknown_collection:
        case Rule::unknown_product:
        case Rule::infeasible_filter:
        case Rule::intent_answer_leak:
            return Severity::error;
        default:
            return Severity::warning;
    }
}

std::string_view severity_name(Severity severity) { return severity == Severity::error ? "error" : "warning"; }

void to_json(json& j, const Issue& issue) {
    j = json{{"rule", rule_name(issue.rule)},
             {"severity", severity_name(issue.severity)},
             {"task_id", issue.task_id},
             {"message", issue.message}};
    if (!issue.evidence.is_null()) j["evidence"] = issue.evidence;
}

Issue issue_from_json(const json& j) {
    const auto rule = parse_rule(j.at("rule").get<std::string>());
    if (!rule) throw std::invalid_argument("unknown rule " + j.at("rule").dump());
    Issue issue{*rule, rule_severity(*rule), j.at("task_id").get<std::string>(), j.value("message", ""), nullptr};
    if (j.contains("evidence")) issue.evidence = j["evidence"];
    return issue;
}

std::optional<std::string> handle_in_hint(std::string_view hint, std::string_view kind) {
    const std::string marker = "/" + std::string(kind) + "/";
    const auto at = hint.find(marker);
    if (at == std::string_view::npos) return std::nullopt;
    const auto start = at + marker.size();
    auto end = start;
    while (end < hint.size() && hint[end] != '/' && hint[end] != '?' && hint[end] != '#' &&
           !std::isspace(static_cast<unsigned char>(hint[end]))) {
        ++end;
    }
    if (end == start) return std::nullopt;
    return to_lower(hint.substr(start, end - start));
}

std::optional<Facet> task_facet(const Task& task) {
    if (task.facet) return task.facet;
    static const std::regex kTemplate(R"(use the (.+?) filter \(e\.g\.,? (.+?)\))");
    static const std::regex kApply(R"([Aa]pply an? (.+?) filter for '(.+?)')");
    std::smatch m;
    if (std::regex_search(task.intent, m, kTemplate) || std::regex_search(task.intent, m, kApply)) {
        return Facet{m[1].str(), m[2].str()};
    }
    return std::nullopt;
}

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Case-insensitive whole-word occurrences of needle in haystack (both already lowercased).
std::vector<std::size_t> word_occurrences(const std::string& haystack, const std::string& needle) {
    std::vector<std::size_t> out;
    if (needle.empty()) return out;
    std::size_t pos = haystack.find(needle);
    while (pos != std::string::npos) {
        const bool left_ok = pos == 0 || !word_char(haystack[pos - 1]) || !word_char(needle.front());
        const std::size_t end = pos + needle.size();
        const bool right_ok = end >= haystack.size() || !word_char(haystack[end]) || !word_char(needle.back());
        if (left_ok && right_ok) out.push_back(pos);
        pos = haystack.find(needle, pos + 1);
    }
    return out;
}

struct Mention {
    std::size_t begin;
    std::size_t end;
    const Product* product = nullptr;
    const Collection* collection = nullptr;
};

/// Product and collection titles mentioned in the intent; longest match wins, no overlaps.
std::vector<Mention> title_mentions(const std::string& lowered_intent, const ShopBundle& bundle) {
    struct Candidate {
        std::string title;
        const Product* product;
        const Collection* collection;
    };
    std::vector<Candidate> candidates;
    for (const auto& p : bundle.products()) candidates.push_back({to_lower(p.title), &p, nullptr});
    for (const auto& c : bundle.collections()) candidates.push_back({to_lower(c.title), nullptr, &c});
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.title.size() > b.title.size(); });
    std::vector<Mention> accepted;
    for (const auto& cand : candidates) {
        for (std::size_t pos : word_occurrences(lowered_intent, cand.title)) {
            const std::size_t end = pos + cand.title.size();
            const bool overlaps = std::any_of(accepted.begin(), accepted.end(),
                                              [&](const Mention& m) { return pos < m.end && m.begin < end; });
            if (!overlaps) accepted.push_back({pos, end, cand.product, cand.collection});
        }
    }
    std::sort(accepted.begin(), accepted.end(), [](const Mention& a, const Mention& b) { return a.begin < b.begin; });
    return accepted;
}

struct Span {
    std::size_t begin;
    std::size_t end;
};

/// Sentence spans, not splitting after "e.g." / "i.e." abbreviations.
std::vector<Span> sentences(const std::string& text) {
    std::vector<Span> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (i + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[i + 1]))) continue;
        if (c == '.' && i >= 3) {
            const std::string tail = to_lower(std::string_view(text).substr(i - 3, 4));
            if (tail == "e.g." || tail == "i.e.") continue;
        }
        out.push_back({start, i + 1});
        start = i + 1;
    }
    if (start < text.size()) out.push_back({start, text.size()});
    return out;
}

class TaskChecker {
public:
    TaskChecker(const Task& task, const ShopBundle& bundle, std::vector<Issue>& out)
        : task_(task), bundle_(bundle), out_(out) {}

    void run() {
        references();
        infeasible_filter();
        answer_leak();
        const std::string lowered = to_lower(task_.intent);
        const auto mentions = title_mentions(lowered, bundle_);
        option_mismatch(lowered, mentions);
        product_not_in_collection(mentions);
    }

private:
    void add(Rule rule, std::string message, json evidence) {
        out_.push_back(Issue{rule, rule_severity(rule), task_.id, std::move(message), std::move(evidence)});
    }

    void references() {
        std::set<std::pair<Rule, std::string>> seen;
        for (const auto& hint : task_.url_hints()) {
            if (auto h = handle_in_hint(hint, "collections"); h && !bundle_.find_collection(*h)) {
                if (seen.insert({Rule::unknown_collection, *h}).second) {
                    add(Rule::unknown_collection, "collection handle '" + *h + "' is not in the catalog", json{{"handle", *h}});
                }
            }
            if (auto h = handle_in_hint(hint, "products"); h && !bundle_.find_product(*h)) {
                if (seen.insert({Rule::unknown_product, *h}).second) {
                    add(Rule::unknown_product, "product handle '" + *h + "' is not in the catalog", json{{"handle", *h}});
                }
            }
            if (auto h = handle_in_hint(hint, "pages"); h && !bundle_.find_page(PageKind::custom_page, *h)) {
                if (seen.insert({Rule::unknown_page, *h}).second) {
                    add(Rule::unknown_page, "page '/pages/" + *h + "' does not exist; a policy route may still serve it",
                        json{{"handle", *h}});
                }
            }
        }
    }

    void infeasible_filter() {
        const auto facet = task_facet(task_);
        if (!facet) return;
        const Collection* target = nullptr;
        for (const auto& hint : task_.url_hints()) {
            if (auto h = handle_in_hint(hint, "collections")) {
                target = bundle_.find_collection(*h);
                if (target) break;
            }
        }
        if (!target) return;
        if (facet_count(bundle_.option_index(target->handle), facet->dimension, facet->value) == 0) {
            add(Rule::infeasible_filter,
                "no product in '" + target->handle + "' realizes " + facet->dimension + "=" + facet->value,
                json{{"collection", target->handle}, {"dimension", facet->dimension}, {"value", facet->value}});
        }
    }

    void answer_leak() {
        if (!task_.success_criteria.response_contains) return;
        for (const auto& value : *task_.success_criteria.response_contains) {
            if (!value.empty() && icontains(task_.intent, value)) {
                add(Rule::intent_answer_leak, "expected answer '" + value + "' appears in the intent", json{{"leaked", value}});
            }
        }
    }

    const Product* hinted_product() const {
        for (const auto& hint : task_.url_hints()) {
            if (auto h = handle_in_hint(hint, "products")) {
                if (const Product* p = bundle_.find_product(*h)) return p;
            }
        }
        return nullptr;
    }

    void option_mismatch(const std::string& lowered, const std::vector<Mention>& mentions) {
        std::vector<std::string> vocabulary = bundle_.dimension_vocabulary();
        for (const char* extra : {"Color", "Size"}) {
            if (std::none_of(vocabulary.begin(), vocabulary.end(), [&](const std::string& d) { return iequals(d, extra); })) {
                vocabulary.emplace_back(extra);
            }
        }
        // Blank out title mentions so a dimension word inside a product title is not read as an instruction.
        std::string masked = lowered;
        for (const auto& m : mentions) std::fill(masked.begin() + m.begin, masked.begin() + m.end, ' ');

        std::set<std::pair<std::string, std::string>> reported;
        for (const auto& sentence : sentences(lowered)) {
            const std::string text = masked.substr(sentence.begin, sentence.end - sentence.begin);
            for (const char* verb : {"select", "choose", "pick"}) {
                for (std::size_t at : word_occurrences(text, verb)) {
                    const std::string after = text.substr(at);
                    for (const auto& dim : vocabulary) {
                        if (word_occurrences(after, to_lower(dim)).empty()) continue;
                        const Product* product = nullptr;
                        const std::size_t verb_pos = sentence.begin + at;
                        for (const auto& m : mentions) {
                            if (m.begin < verb_pos && m.product) product = m.product;
                        }
                        if (!product) product = hinted_product();
                        if (!product || product_has_dimension(*product, dim)) continue;
                        if (!reported.insert({product->handle, to_lower(dim)}).second) continue;
                        add(Rule::option_mismatch, "intent asks to select " + dim + " but '" + product->title + "' has no such option",
                            json{{"product", product->handle}, {"dimension", dim}});
                    }
                }
            }
        }
    }

    void product_not_in_collection(const std::vector<Mention>& mentions) {
        std::vector<const Product*> products;
        std::vector<const Collection*> collections;
        for (const auto& m : mentions) {
            if (m.product && std::find(products.begin(), products.end(), m.product) == products.end()) {
                products.push_back(m.product);
            }
            if (m.collection && std::find(collections.begin(), collections.end(), m.collection) == collections.end()) {
                collections.push_back(m.collection);
            }
        }
        if (products.empty() || collections.empty()) return;
        for (const Product* p : products) {
            const bool member = std::any_of(collections.begin(), collections.end(), [&](const Collection* c) {
                return std::find(c->product_handles.begin(), c->product_handles.end(), p->handle) != c->product_handles.end();
            });
            if (member) continue;
            json names = json::array();
            for (const Collection* c : collections) names.push_back(c->handle);
            add(Rule::product_not_in_collection,
                "'" + p->title + "' is not a member of the collection(s) the intent names",
                json{{"product", p->handle}, {"collections", names}});
        }
    }

    const Task& task_;
    const ShopBundle& bundle_;
    std::vector<Issue>& out_;
};

}  // namespace

std::vector<Issue> validate(const std::vector<Task>& tasks, const ShopBundle& bundle) {
    std::vector<Issue> issues;
    for (const auto& task : tasks) TaskChecker(task, bundle, issues).run();
    return issues;
}

std::vector<Issue> actionable_subset(const std::vector<Issue>& issues) {
    std::vector<Issue> out;
    for (const auto& issue : issues) {
        if (issue.severity == Severity::error || issue.rule == Rule::option_mismatch ||
            issue.rule == Rule::product_not_in_collection) {
            out.push_back(issue);
        }
    }
    return out;
}

Disposition exit_disposition(const std::vector<Issue>& issues) {
    Disposition d;
    if (issues.empty()) return d;
    std::vector<std::string> order;
    std::map<std::string, std::vector<const Issue*>> by_task;
    std::size_t errors = 0;
    for (const auto& issue : issues) {
        if (!by_task.count(issue.task_id)) order.push_back(issue.task_id);
        by_task[issue.task_id].push_back(&issue);
        if (issue.severity == Severity::error) ++errors;
    }
    std::ostringstream out;
    for (const auto& id : order) {
        out << id << "\n";
        for (Rule rule : kAllRules) {
            for (const Issue* issue : by_task[id]) {
                if (issue->rule != rule) continue;
                out << "  " << severity_name(issue->severity) << "  " << rule_name(rule) << ": " << issue->message << "\n";
            }
        }
    }
    out << errors << " error(s), " << issues.size() - errors << " warning(s)\n";
    d.code = errors > 0 ? 2 : 0;
    d.report = out.str();
    return d;
}

}  // namespace storebench
