#include "storebench/journey.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "storebench/process.hpp"

namespace storebench {

using nlohmann::json;

namespace {

// The truncated hard-rule line is completed with the smallest wording that reconnects it to the next line.
const std::string kSystemPrompt = R"(You are an expert at designing evaluation tasks for e-commerce web agents.
Your job is to author realistic end-to-end shopping journeys that mirror how
real human buyers actually browse and transact on online stores.

Hard rules:
- Every task must be 100% grounded in the shop data. Never invent
  products, collections, page titles, or variant options that are not in
  the data dump below.
- A product mentioned in a task must exist in the catalog (Title + handle).
- A collection mentioned in a task must exist (Title + handle).
- If you ask the agent to "select a Color variant" or "select a Size",
  the named product MUST have that variant option AND values. Otherwise
  use generic phrasing like "select any variant" or simply "add it to cart".
- A product/collection pairing in the same task (e.g. "Navigate to X
  collection and add product Y") is only valid if Y is actually a member
  of X according to the Product-to-Collection Mappings section.
- Every task must end in a well-defined state the agent can reach: a
  specific set of items in the cart, a specific URL visited for a
  navigation task. Never "and then browse around".
- **Never instruct the agent to click Checkout, proceed to checkout, head
  to a checkout page, abandon checkout, or otherwise traverse the cart ->
  checkout boundary.** Checkout is intentionally disabled on the sandbox
  shop and the LLM judge grades tasks on the **final cart state only**.
  End shopping tasks with wording like "Once the product is in your cart,
  end the session. Do not click any Checkout button." For tasks involving
  cart edits (add -> remove, quantity change), describe the expected final
  cart explicitly.
- Intents should be second-person, imperative. Shopping tasks should be
  one or two short paragraphs; they may include natural detours (policy
  lookup, About page, brand comparison) before the cart-state terminal.
- Avoid tasks that require user authentication, payment entry, or any
  externally-gated flow.
- Do not produce tasks that require human judgment calls the agent cannot
  verify (e.g., "pick the most stylish product").

Quality bar (this is what separates a great task from a basic one):
- Open with a one-sentence persona or motivation that frames the journey
  ("First-time visitor.", "You're a returns-cautious shopper.",
  "Multi-pet household shopping.", "Sales hunting.").
- Reference specific storefront UI elements (homepage banner, top menu,
  footer Quick Links, brand menu) by name when they exist.
- Mix at least 2-3 distinct skills per task (search + compare + cart edit;
  policy lookup + nav drilldown + add). Single-step "search and add"
  tasks are too easy and should be the minority.
- Use exact brand/product/collection titles as written in the data --
  never paraphrase ("Fresh Drops" not "new arrivals", "Womens Run Club"
  not "running gear").

Output format: a JSON object with a single key "tasks" containing an array
of task objects, each with fields:
  id (slug-friendly string),
  type ("shopping" or "navigation"),
  intent (string),
  success_criteria (object with url_contains and a descriptive type field).
Do not include the `url` field -- that will be filled in downstream.
)";

const char* const kBehaviorCategories[] = {
    "Search & atomic add-to-cart",
    "Nav drilldown (menu -> sub-menu -> collection -> product)",
    "Filter + sort (e.g. Format=Hardcover then sort by price)",
    "Filter that returns zero results, then recover",
    "Substitute-match discovery (intended product missing -> close alternative)",
    "Review / detail read on a product page",
    "Size chart / fit guide lookup",
    "Shipping policy lookup (with cart action after)",
    "Returns / refunds lookup (with cart action after)",
    "Gift card purchase (only if the shop sells gift cards)",
    "Multi-product cart with edit (add A, add B, remove A, set qty 2 on B)",
    "Cross-collection or cross-brand comparison (compare A and B, pick one)",
    "Contact / store locator / about page",
    "Free-shipping threshold or sale-discount calculation (if banner exists)",
};
constexpr std::size_t kGiftCardCategory = 10;

const char* const kAntiPatterns = R"(### Anti-patterns to AVOID
- "Search for X. Pick a Color and Size variant. Add to cart." -- too thin,
  no persona, no detour, single skill.
- Mentioning "Color" or "Size" for a product whose options list above does
  NOT include that name.
- Generic UI references like "navigate to the homepage" without naming a
  specific section or CTA.
- Two products in one intent that are not co-located in any collection
  according to the membership list above.
)";

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string lines_or_none(const std::vector<std::string>& lines) { return lines.empty() ? "none" : join(lines, "\n"); }

/// "Color: Black, Red | Size: S" from the values the variants actually carry.
std::string real_options(const Product& p) {
    std::vector<std::string> parts;
    for (const auto& axis : p.option_axes) {
        std::vector<std::string> values;
        for (const auto& v : p.variants) {
            const std::string* value = v.option(axis);
            if (value && std::find(values.begin(), values.end(), *value) == values.end()) values.push_back(*value);
        }
        if (!values.empty()) parts.push_back(axis + ": " + join(values, ", "));
    }
    return parts.empty() ? "no variant options" : join(parts, " | ");
}

std::string product_line(const Product& p) {
    std::string line = p.title + " -- " + p.handle + " [" + real_options(p) + "]";
    if (!p.any_available()) line += " (sold out)";
    return line;
}

struct ShopSections {
    std::string profile;
    std::string collections;
    std::string product_types;
    std::string products;
    std::string mapping;
    std::string option_patterns;
    std::string pages;
    std::string gift_cards;
    bool has_gift_cards = false;
};

ShopSections shop_sections(const ShopBundle& bundle, const PromptOptions& options) {
    const auto& shop = bundle.capabilities().shop;
    ShopSections s;
    s.profile = "Name: " + shop.name.value_or(bundle.shop_slug()) + "\nDescription: " + shop.descriptor +
                "\nCountry: " + shop.country.value_or("unspecified") + ", Currency: " + shop.currency +
                ", Language: " + shop.language.value_or("unspecified") + "\nDomain: " + options.domain;

    std::vector<std::string> lines;
    for (const auto& c : bundle.collections()) lines.push_back(c.title + " -- " + c.handle);
    s.collections = lines_or_none(lines);

    std::map<std::string, int> type_counts;
    for (const auto& p : bundle.products()) {
        if (p.is_active() && !p.product_type.empty()) ++type_counts[p.product_type];
    }
    std::vector<std::pair<std::string, int>> types(type_counts.begin(), type_counts.end());
    std::stable_sort(types.begin(), types.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    lines.clear();
    for (const auto& [type, n] : types) lines.push_back(type + " (" + std::to_string(n) + (n == 1 ? " product)" : " products)"));
    s.product_types = lines_or_none(lines);

    lines.clear();
    std::vector<std::string> gift_lines;
    for (const auto& p : bundle.products()) {
        if (!p.is_active()) continue;
        (p.gift_card ? gift_lines : lines).push_back(product_line(p));
    }
    s.products = lines_or_none(lines);
    s.gift_cards = lines_or_none(gift_lines);
    s.has_gift_cards = !gift_lines.empty();

    s.mapping = lines_or_none(membership_lines(bundle));

    lines.clear();
    for (const auto& c : bundle.collections()) {
        const OptionIndex& index = bundle.option_index(c.handle);
        std::vector<std::string> dims;
        for (const auto& [dim, values] : index) {
            std::vector<std::string> entries;
            for (const auto& [value, count] : values) {
                if (count > 0) entries.push_back(value + " (" + std::to_string(count) + ")");
            }
            if (!entries.empty()) dims.push_back(dim + " = " + join(entries, ", "));
        }
        if (!dims.empty()) lines.push_back(c.handle + ": " + join(dims, "; "));
    }
    s.option_patterns = lines_or_none(lines);

    lines.clear();
    for (const auto& page : bundle.pages()) lines.push_back(page.title + " -- " + page.route());
    s.pages = lines_or_none(lines);
    return s;
}

std::string context_block(const ShopSections& s) {
    std::string out;
    out += "### Shop profile\n" + s.profile + "\n\n";
    out += "### Top collections (title -- handle)\n" + s.collections + "\n\n";
    out += "### Top product types\n" + s.product_types + "\n\n";
    out += "### Example products (title -- handle, with REAL variant options & values)\n" + s.products + "\n\n";
    out += "### Product-to-Collection memberships (use these to ground multi-step tasks)\n" + s.mapping + "\n\n";
    out += "### Collection facets / option patterns (for filter tasks)\n" + s.option_patterns + "\n\n";
    out += "### Policy / info pages (title -- /pages/handle)\n" + s.pages + "\n\n";
    out += "### Gift card products\n" + s.gift_cards + "\n\n";
    return out;
}

std::string render_example(const FewShotExample& e, char letter) {
    return std::string("Example ") + letter + ": " + e.title + "\nintent: \"" + e.intent + "\"\nsuccess_criteria.type: \"" +
           e.criteria_type + "\"\n";
}

}  // namespace

const std::string& journey_system_prompt() { return kSystemPrompt; }

const std::vector<FewShotExample>& few_shot_library() {
    // A-C come from the released benchmark; D-H are written for this toolkit to cover categories 3, 6, 9, 12 and 13.
    static const std::vector<FewShotExample> examples{
        {"Multi-pet household shopping",
         "Multi-pet household shopping. Navigate to the Dog Kibble collection via the Dogs menu and add any kibble "
         "product to cart. Navigate to Cats -> Litter from the top menu and open Worlds Best Cat Litter. Select any "
         "size variant (for example Original 28lb) and add it to cart. Open the full cart page and increase the cat "
         "litter quantity from 1 to 2. Once the cart contains one dog kibble and two units of cat litter, end the "
         "session. Do not click any Checkout button.",
         "cart_multi_pet_with_quantity_edit"},
        {"Free-shipping threshold calculation",
         "Hit the free-shipping threshold. Note the 'Nemokamas pristatymas nuo 49 EUR' banner on the homepage. "
         "Navigate to Sunims -> Skanestai and add a treat product under EUR 25 to the cart. Open the cart page, "
         "observe how much more you need to reach EUR 49 for free shipping. Go back to the store, navigate to the "
         "same Skanestai category, and add a second product that pushes the total over EUR 49. Return to cart, "
         "confirm the free-shipping banner has updated. Once both products are in your cart with a total over EUR 49, "
         "end the session. Do not click any Checkout button.",
         "cart_after_free_shipping_threshold"},
        {"Filter that returns zero results, then recover",
         "Navigate to the Christmas & Hanukkah collection via the Shop by Holidays & Events menu. Apply a Size filter "
         "for '3-6 Months'; results will likely be sparse or empty. Observe the empty or filtered state, then clear "
         "the Size filter and apply a different one such as Color = Blue. If products appear, open the first one, "
         "select any variant, and add it to cart; if still empty, remove all filters and pick any product from the "
         "unfiltered list. Once a product is in your cart, end the session. Do not click any Checkout button.",
         "cart_after_filter_recover"},
        {"Returns lookup before buying",
         "You're a returns-cautious shopper. Open the Refund Policy from the footer Quick Links and note how many days "
         "you have to send an item back. Then open the Trail Socks collection from the top menu, open Merino Crew "
         "Sock, choose any available size, and add it to cart. Once the sock is in your cart, end the session. Do not "
         "click any Checkout button.",
         "cart_after_returns_lookup"},
        {"Filter then sort",
         "Budget-minded reader. Open the Fiction collection from the Books menu, apply the Format filter for "
         "Paperback, then sort the results by price from low to high. Open the first book in the sorted list and add "
         "it to cart. Once that paperback is in your cart, end the session. Do not click any Checkout button.",
         "cart_after_filter_sort"},
        {"Review read on a product page",
         "Review-driven buyer. Search for Everyday Tote, open its product page, and scroll to the customer reviews "
         "section to read at least two reviews. If the average rating shown is 4 stars or higher, add the tote to "
         "cart; otherwise return to the Bags collection and add the first other bag listed. Once exactly one bag is in "
         "your cart, end the session. Do not click any Checkout button.",
         "cart_after_review_read"},
        {"Cross-brand comparison",
         "Comparing two brands. In the Espresso Machines collection, open the Bellamy Duo and the Corsa Mini product "
         "pages and compare their listed prices. Add only the cheaper of the two to cart. Once the cart holds that "
         "single machine, end the session. Do not click any Checkout button.",
         "cart_after_brand_comparison"},
        {"About and contact pages",
         "First-time visitor. Use the footer link to open the About Us page and read who runs the store, then open "
         "the Contact page and note the support email address. Finish on the Contact page and end the session.",
         "page_navigation"},
    };
    return examples;
}

std::vector<std::string> membership_lines(const ShopBundle& bundle) {
    std::vector<std::string> lines;
    for (const auto& p : bundle.products()) {
        if (!p.is_active()) continue;
        std::vector<std::string> handles;
        for (const Collection* c : bundle.collections_containing(p.handle)) handles.push_back(c->handle);
        if (!handles.empty()) lines.push_back(p.handle + " -> " + join(handles, ", "));
    }
    return lines;
}

PromptContext build_prompt(const ShopBundle& bundle, std::size_t count, const PromptOptions& options) {
    if (count == 0) throw PromptError("journey count must be at least 1");
    if (bundle.collections().empty()) throw PromptError("bundle has no collections; journeys need navigable structure");
    const ShopSections s = shop_sections(bundle, options);
    const std::string n = std::to_string(count);

    PromptContext ctx;
    ctx.system_prompt = kSystemPrompt;
    ctx.few_shot = few_shot_library();

    std::string u;
    u += "Author " + n + " end-to-end evaluation tasks for the following storefront.\n";
    u += "Follow the system prompt's schema and quality bar. Cover as many of the\n";
    u += "behavior categories below as this store supports, and skip any that are\n";
    u += "not applicable to this store.\n\n";
    u += context_block(s);
    u += "### Behavior categories to cover (aim for at least 10 of 14)\n";
    for (std::size_t i = 0; i < std::size(kBehaviorCategories); ++i) {
        std::string number = std::to_string(i + 1) + ".";
        number.resize(4, ' ');
        u += number + kBehaviorCategories[i];
        if (i + 1 == kGiftCardCategory && !s.has_gift_cards) u += " -- not applicable: this shop sells no gift cards";
        u += "\n";
    }
    u += "\n### High-quality reference tasks (from other shops in this benchmark suite)\n";
    for (std::size_t i = 0; i < ctx.few_shot.size(); ++i) {
        u += render_example(ctx.few_shot[i], static_cast<char>('A' + i)) + "\n";
    }
    u += kAntiPatterns;
    u += "\nWhen constructing tasks, USE EXACT product titles, collection titles, and\n";
    u += "option names from the lists above. Use the storefront's own wording for\n";
    u += "collection names (\"Fresh Drops\" not \"new arrivals\"). For multi-step tasks,\n";
    u += "ensure each (collection, product) pair you mention is a real membership.\n\n";
    u += "Respond with a JSON object with a \"tasks\" key containing the array of\n";
    u += n + " tasks. Each `id` should use the format\n";
    u += "\"" + bundle.shop_slug() + "-e2e-v1-{index}\" replacing {index} with numbers starting at 1.\n";
    ctx.user_prompt = std::move(u);
    return ctx;
}

std::string build_polish_prompt(const ShopBundle& bundle, const std::vector<Task>& flagged,
                                const std::vector<Issue>& issues, const PromptOptions& options) {
    std::string u;
    u += "Revise the " + std::to_string(flagged.size()) +
         " flagged end-to-end evaluation tasks below for the following storefront.\n";
    u += "A validator found the listed problems. Fix every listed problem using only the shop data,\n";
    u += "keep each task's id exactly as given, and keep the system prompt's schema and quality bar.\n\n";
    u += context_block(shop_sections(bundle, options));
    u += "### Flagged tasks and validator issues\n";
    for (const auto& task : flagged) {
        u += "Task " + task.id + ":\n" + json(task).dump(2) + "\nIssues:\n";
        for (const auto& issue : issues) {
            if (issue.task_id != task.id) continue;
            u += "- [" + std::string(rule_name(issue.rule)) + "] " + issue.message + "\n";
        }
        u += "\n";
    }
    u += "Respond with a JSON object with a \"tasks\" key containing only the " + std::to_string(flagged.size()) +
         " revised tasks.\n";
    return u;
}

std::string_view generation_mode_name(GenerationMode mode) {
    switch (mode) {
        case GenerationMode::initial: return "initial";
        case GenerationMode::polish: return "polish";
        case GenerationMode::retry: return "retry";
    }
    return "initial";
}

json to_json(const GenerationRequest& request) {
    return json{{"system", request.system},       {"user", request.user},
                {"mode", generation_mode_name(request.mode)},
                {"expected_ids", request.expected_ids}, {"count", request.count},
                {"shop_slug", request.shop_slug}};
}

std::string journey_id(const std::string& shop_slug, std::size_t index) {
    return shop_slug + "-e2e-v1-" + std::to_string(index);
}

// ---------------------------------------------------------------------------
// Generators

namespace {

class StubGenerator : public TextGenerator {
public:
    enum class Behavior { clean, converging, stubborn };

    StubGenerator(const ShopBundle& bundle, Behavior behavior) : bundle_(bundle), behavior_(behavior) {
        // Round-robin over collections so consecutive journeys visit different collections.
        std::vector<std::vector<const Product*>> per_collection;
        for (const auto& c : bundle.collections()) {
            std::vector<const Product*> members;
            for (const Product* p : bundle.collection_products(c)) {
                if (p->is_active() && !p->gift_card && p->any_available()) members.push_back(p);
            }
            if (!members.empty()) {
                collections_.push_back(&c);
                per_collection.push_back(std::move(members));
            }
        }
        for (std::size_t depth = 0;; ++depth) {
            bool any = false;
            for (std::size_t i = 0; i < collections_.size(); ++i) {
                if (depth < per_collection[i].size()) {
                    pairs_.push_back({collections_[i], per_collection[i][depth]});
                    any = true;
                }
            }
            if (!any) break;
        }
        for (const auto& page : bundle.pages()) pages_.push_back(&page);
    }

    std::string complete(const GenerationRequest& request, std::chrono::milliseconds) override {
        json tasks = json::array();
        const bool planted = behavior_ == Behavior::stubborn ||
                             (behavior_ == Behavior::converging && request.mode != GenerationMode::polish);
        for (const auto& id : request.expected_ids) {
            const std::size_t index = index_of(id);
            tasks.push_back(json(journey(id, index, planted && index % 2 == 1)));
        }
        return json{{"tasks", tasks}}.dump(2);
    }

private:
    static std::size_t index_of(const std::string& id) {
        const auto dash = id.rfind('-');
        try {
            return dash == std::string::npos ? 1 : std::stoul(id.substr(dash + 1));
        } catch (const std::exception&) {
            return 1;
        }
    }

    Task journey(const std::string& id, std::size_t index, bool plant) const {
        Task t;
        t.id = id;
        t.type = TaskType::shopping;
        const std::string end = " Once the product is in your cart, end the session. Do not click any Checkout button.";
        if (pairs_.empty()) {
            t.intent = "First-time visitor. Open the home page and add any product to cart." + end;
            t.success_criteria.url_contains = "/";
            t.success_criteria.type = "cart_after_home_visit";
        } else {
            const auto [c, p] = pairs_[(index - 1) % pairs_.size()];
            const std::string nav = "navigate to the \"" + c->title + "\" collection, open \"" + p->title + "\", ";
            switch ((index - 1) % 3) {
                case 0:
                    t.intent = "First-time visitor. From the top menu, " + nav +
                               "select any available variant, and add it to cart." + end;
                    t.success_criteria.url_contains = "/collections/" + c->handle;
                    t.success_criteria.type = "cart_after_nav_drilldown";
                    break;
                case 1:
                    t.intent = "Stocking up. Using the top menu, " + nav +
                               "and add it to cart. Open the full cart page and set its quantity to 2. Once the cart "
                               "holds two units of that product, end the session. Do not click any Checkout button.";
                    t.success_criteria.url_contains = "/products/" + p->handle;
                    t.success_criteria.type = "cart_after_quantity_edit";
                    break;
                default:
                    if (pages_.empty()) {
                        t.intent = "Comparing options. From the top menu, " + nav +
                                   "select any available variant, and add it to cart." + end;
                        t.success_criteria.url_contains = "/products/" + p->handle;
                        t.success_criteria.type = "cart_after_nav_drilldown";
                    } else {
                        const PageDoc* page = pages_[(index - 1) / 3 % pages_.size()];
                        t.intent = "You're a careful shopper. Open the information page at " + page->route() +
                                   " from the footer and read it. Then " + nav +
                                   "select any available variant, and add it to cart." + end;
                        t.success_criteria.url_contains = page->route();
                        t.success_criteria.type = "cart_after_policy_lookup";
                    }
                    break;
            }
            if (plant) t.success_criteria.url_contains = "/products/" + p->handle + "-limited-edition";
        }
        return t;
    }

    const ShopBundle& bundle_;
    Behavior behavior_;
    std::vector<const Collection*> collections_;
    std::vector<std::pair<const Collection*, const Product*>> pairs_;
    std::vector<const PageDoc*> pages_;
};

class ProcessGenerator : public TextGenerator {
public:
    explicit ProcessGenerator(std::string command) : command_(std::move(command)) {}

    std::string complete(const GenerationRequest& request, std::chrono::milliseconds timeout) override {
        ProcessResult r;
        try {
            r = run_process(command_, to_json(request).dump(), timeout);
        } catch (const ProcessError& e) {
            throw GeneratorError(e.what());
        }
        if (r.timed_out) throw GeneratorError("generator timed out: " + command_);
        if (r.exit_code != 0) {
            throw GeneratorError("generator exited with code " + std::to_string(r.exit_code) + ": " + r.err);
        }
        return r.out;
    }

private:
    std::string command_;
};

}  // namespace

bool is_stub_generator_name(std::string_view name) {
    return name == "stub" || name == "stub-polish" || name == "stub-stubborn";
}

std::unique_ptr<TextGenerator> make_stub_generator(std::string_view name, const ShopBundle& bundle) {
    if (name == "stub") return std::make_unique<StubGenerator>(bundle, StubGenerator::Behavior::clean);
    if (name == "stub-polish") return std::make_unique<StubGenerator>(bundle, StubGenerator::Behavior::converging);
    if (name == "stub-stubborn") return std::make_unique<StubGenerator>(bundle, StubGenerator::Behavior::stubborn);
    throw std::invalid_argument("unknown stub generator '" + std::string(name) + "'");
}

std::unique_ptr<TextGenerator> make_process_generator(std::string command) {
    return std::make_unique<ProcessGenerator>(std::move(command));
}

// ---------------------------------------------------------------------------
// Orchestration

std::vector<Task> parse_generated_tasks(std::string_view completion) {
    const auto begin = completion.find_first_of("{[");
    const auto end = completion.find_last_of("}]");
    if (begin == std::string_view::npos || end == std::string_view::npos || end < begin) {
        throw TaskSchemaError("completion contains no JSON document");
    }
    json document;
    try {
        document = parse_json_lenient(completion.substr(begin, end - begin + 1));
    } catch (const json::parse_error& e) {
        throw TaskSchemaError(std::string("completion is not valid JSON: ") + e.what());
    }
    if (document.is_object() && !document.contains("tasks")) throw TaskSchemaError("completion has no \"tasks\" key");
    if (!document.is_object() && !document.is_array()) throw TaskSchemaError("completion is not a task list");
    return tasks_from_document(document);
}

std::vector<Task> merge_regenerated(const std::vector<Task>& original, const std::vector<Task>& regenerated,
                                    const std::set<std::string>& flagged_ids) {
    std::map<std::string, const Task*> by_id;
    for (const auto& task : regenerated) {
        if (!flagged_ids.count(task.id)) throw MergeError("regenerated task '" + task.id + "' was not flagged");
        if (!by_id.emplace(task.id, &task).second) throw MergeError("regenerated task '" + task.id + "' appears twice");
    }
    std::vector<Task> out;
    out.reserve(original.size());
    for (const auto& task : original) {
        auto it = by_id.find(task.id);
        out.push_back(it == by_id.end() ? task : *it->second);
    }
    return out;
}

JourneyResult generate_journeys(TextGenerator& generator, const ShopBundle& bundle, std::size_t count,
                                const JourneyOptions& options) {
    const PromptContext prompt = build_prompt(bundle, count, options.prompt);
    JourneyResult result;
    bool retry_used = false;

    std::vector<std::string> all_ids;
    for (std::size_t i = 1; i <= count; ++i) all_ids.push_back(journey_id(bundle.shop_slug(), i));

    // One content call, plus the run's single re-request when the reply is unusable.
    auto call = [&](GenerationRequest request, auto&& usable) -> std::optional<std::vector<Task>> {
        for (;;) {
            ++result.generator_calls;
            const std::string text = generator.complete(request, options.timeout);
            try {
                auto tasks = parse_generated_tasks(text);
                usable(tasks);
                return tasks;
            } catch (const TaskSchemaError& e) {
                if (retry_used) {
                    result.halt_reason = std::string("generator output unusable after retry: ") + e.what();
                    return std::nullopt;
                }
                retry_used = true;
                request.mode = GenerationMode::retry;
            }
        }
    };
    auto halt = [&]() {
        result.exit_code = kHaltExitCode;
        result.tasks.clear();
        return result;
    };

    GenerationRequest initial{prompt.system_prompt, prompt.user_prompt, GenerationMode::initial, all_ids, count,
                              bundle.shop_slug()};
    auto first = call(initial, [&](const std::vector<Task>& tasks) {
        std::set<std::string> got;
        for (const auto& t : tasks) {
            if (!got.insert(t.id).second) throw TaskSchemaError("duplicate id " + t.id);
        }
        if (got != std::set<std::string>(all_ids.begin(), all_ids.end())) {
            throw TaskSchemaError("reply ids do not match the requested " + std::to_string(count) + " journey ids");
        }
    });
    if (!first) return halt();
    std::vector<Task> tasks = std::move(*first);

    auto record = [&](int round_index, std::vector<std::string> rejected) {
        GenerationRound round;
        round.round_index = round_index;
        round.candidate_tasks = tasks;
        round.issues = validate(tasks, bundle);
        for (const auto& issue : actionable_subset(round.issues)) round.flagged_ids.insert(issue.task_id);
        round.rejected_ids = std::move(rejected);
        result.rounds.push_back(std::move(round));
        return result.rounds.back().flagged_ids;
    };

    std::set<std::string> flagged = record(0, {});
    while (!flagged.empty()) {
        if (result.rounds_used == kMaxPolishRounds) {
            result.halt_reason = std::to_string(flagged.size()) + " task(s) still flagged after " +
                                 std::to_string(kMaxPolishRounds) + " polish rounds";
            return halt();
        }
        ++result.rounds_used;
        std::vector<Task> flagged_tasks;
        for (const auto& t : tasks) {
            if (flagged.count(t.id)) flagged_tasks.push_back(t);
        }
        const auto& last = result.rounds.back();
        GenerationRequest polish{prompt.system_prompt,
                                 build_polish_prompt(bundle, flagged_tasks, last.issues, options.prompt),
                                 GenerationMode::polish,
                                 std::vector<std::string>(flagged.begin(), flagged.end()),
                                 flagged.size(),
                                 bundle.shop_slug()};
        auto regenerated = call(polish, [](const std::vector<Task>&) {});
        if (!regenerated) return halt();

        // Tasks whose id changed are dropped; the original stays and is flagged again.
        std::vector<Task> accepted;
        std::vector<std::string> rejected;
        std::set<std::string> seen;
        for (auto& t : *regenerated) {
            if (flagged.count(t.id) && seen.insert(t.id).second) {
                accepted.push_back(std::move(t));
            } else {
                rejected.push_back(t.id);
            }
        }
        tasks = merge_regenerated(tasks, accepted, flagged);
        flagged = record(result.rounds_used, std::move(rejected));
    }
    result.tasks = std::move(tasks);
    return result;
}

json audit_log(const JourneyResult& result) {
    json rounds = json::array();
    for (const auto& round : result.rounds) {
        rounds.push_back(json{{"round", round.round_index},
                              {"flagged_ids", round.flagged_ids},
                              {"rejected_ids", round.rejected_ids},
                              {"issues", round.issues}});
    }
    json log{{"rounds_used", result.rounds_used},
             {"generator_calls", result.generator_calls},
             {"exit_code", result.exit_code},
             {"rounds", rounds}};
    if (!result.halt_reason.empty()) log["halt_reason"] = result.halt_reason;
    return log;
}

}  // namespace storebench
