#include "storebench/taskgen.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "storebench/validator.hpp"

namespace storebench {

namespace {

std::string task_id(const ShopBundle& bundle, std::string_view skill, std::size_t n) {
    return bundle.shop_slug() + "-" + std::string(skill) + "-" + std::to_string(n);
}

std::string in_quotes(std::string_view text) { return "\"" + std::string(text) + "\""; }

std::string filter_intent(const Collection& c, const Facet& facet) {
    return "Navigate to the " + in_quotes(c.title) + " collection on this store. Find and use the " + facet.dimension +
           " filter (e.g. " + facet.value +
           ") to select an option. If products are shown after filtering, select any variant of a product and add it "
           "to cart. It is ok if no products match the filter; using filter correctly means the navigation task is "
           "completed successfully.";
}

std::string browse_intent(const Collection& c) {
    return "Navigate to the " + in_quotes(c.title) +
           " collection on this store. Open any product shown in the collection, select any available variant, and "
           "add it to cart. Once the product is in your cart, end the session.";
}

std::string exact_intent(const Product& p) {
    return "Search this store for the product " + in_quotes(p.title) +
           ". Open its product page, select any available variant, and add it to cart. Once the product is in your "
           "cart, end the session.";
}

std::string substitute_intent(const Product& p) {
    const std::string kind = p.product_type.empty() ? "product" : p.product_type;
    return "You want something like the " + in_quotes(p.title) + ", but not that exact item. Find a similar " + kind +
           " and add it to cart. Once the product is in your cart, end the session.";
}

const std::string kReturnsIntent =
    "Find the returns and refund policy page on this store. Look for return policy information in the footer, menu, "
    "or any navigation links. Read the refund policy details, then leave the site.";

const std::string kShippingIntent =
    "Find the shipping policy page on this store. Look for shipping or delivery information in the footer, menu, or "
    "any navigation links. Read the shipping policy details, then leave the site.";

/// Index into [0, n) drawn by modulo reduction, so sequences are portable across standard libraries.
std::size_t draw(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

std::vector<const Collection*> browsable_collections(const ShopBundle& bundle, const GeneratorConfig& config) {
    std::vector<const Collection*> out;
    for (const auto& c : bundle.collections()) {
        if (is_generic_collection(c.handle, config.generic_collections)) continue;
        if (c.product_handles.size() < config.min_collection_size) continue;
        out.push_back(&c);
    }
    return out;
}

std::optional<Facet> choose_facet(const OptionIndex& index, const GeneratorConfig& config, std::mt19937_64& rng) {
    auto values_of = [&](std::string_view dim) -> std::pair<std::string, std::vector<std::string>> {
        for (const auto& [name, values] : index) {
            if (!iequals(name, dim)) continue;
            std::vector<std::string> feasible;
            for (const auto& [value, count] : values) {
                if (count > 0) feasible.push_back(value);
            }
            return {name, feasible};
        }
        return {};
    };
    for (const auto& dim : config.priority_dimensions) {
        auto [name, values] = values_of(dim);
        if (!values.empty()) return Facet{name, values[draw(rng, values.size())]};
    }
    // Fallback to the universal fields, only when they actually discriminate.
    for (std::string_view dim : {kBrandDimension, kTypeDimension}) {
        auto [name, values] = values_of(dim);
        if (values.size() >= 2) return Facet{name, values[draw(rng, values.size())]};
    }
    return std::nullopt;
}

struct PolicySpec {
    std::string skill;
    std::vector<std::string> keywords;
    std::string default_handle;
    const std::string* intent;
};

std::optional<Task> policy_task(const ShopBundle& bundle, const PolicySpec& spec) {
    struct Candidate {
        int rank;
        std::size_t order;
        const PageDoc* page;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < bundle.pages().size(); ++i) {
        const PageDoc& page = bundle.pages()[i];
        const bool hit = std::any_of(spec.keywords.begin(), spec.keywords.end(), [&](const std::string& k) {
            return icontains(page.title, k) || icontains(page.handle, k);
        });
        if (!hit) continue;
        int rank = 2;
        if (page.kind == PageKind::native_policy) rank = iequals(page.handle, spec.default_handle) ? 0 : 1;
        candidates.push_back({rank, i, &page});
    }
    if (candidates.empty()) return std::nullopt;
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.rank < b.rank; });
    Task task;
    task.type = TaskType::navigation;
    task.intent = *spec.intent;
    task.success_criteria.type = "page_navigation";
    task.success_criteria.url_contains = candidates.front().page->route();
    std::vector<std::string> alt;
    for (std::size_t i = 1; i < candidates.size(); ++i) alt.push_back(candidates[i].page->route());
    const std::string default_route = "/policies/" + spec.default_handle;
    if (*task.success_criteria.url_contains != default_route &&
        std::find(alt.begin(), alt.end(), default_route) == alt.end()) {
        alt.push_back(default_route);
    }
    if (!alt.empty()) task.url_contains_alt = alt;
    task.id = task_id(bundle, spec.skill, 1);
    return task;
}

}  // namespace

std::vector<Task> gen_discovery(const ShopBundle& bundle, std::size_t count_limit) {
    std::vector<Task> exact;
    std::vector<Task> substitute;
    std::size_t n = 0;
    for (const Product* p : eligible_discovery_products(bundle)) {
        if (n == count_limit) break;
        ++n;
        Task e;
        e.id = task_id(bundle, "search-exact", n);
        e.type = TaskType::shopping;
        e.intent = exact_intent(*p);
        e.success_criteria.url_contains = "/products/" + p->handle;
        e.success_criteria.type = "cart_exact";
        exact.push_back(std::move(e));

        Task s;
        s.id = task_id(bundle, "search-substitute", n);
        s.type = TaskType::shopping;
        s.intent = substitute_intent(*p);
        s.success_criteria.url_contains = "/products/";
        s.success_criteria.type = "cart_substitute";
        substitute.push_back(std::move(s));
    }
    exact.insert(exact.end(), std::make_move_iterator(substitute.begin()), std::make_move_iterator(substitute.end()));
    return exact;
}

std::vector<Task> gen_browse_filter(const ShopBundle& bundle, const GeneratorConfig& config) {
    std::mt19937_64 rng(config.seed);
    auto pool = browsable_collections(bundle, config);
    // Fisher-Yates with modulo draws.
    for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[draw(rng, i)]);

    std::vector<Task> browse;
    std::vector<const Collection*> browse_targets(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(
                                                                                   std::min(pool.size(), config.browse_limit)));
    for (const Collection* c : browse_targets) {
        Task t;
        t.id = task_id(bundle, "browse", browse.size() + 1);
        t.type = TaskType::shopping;
        t.intent = browse_intent(*c);
        t.success_criteria.url_contains = "/collections/" + c->handle;
        t.success_criteria.type = "navigation";
        browse.push_back(std::move(t));
    }

    std::vector<Task> filter;
    for (const Collection* c : pool) {
        if (filter.size() == config.filter_limit) break;
        const auto facet = choose_facet(bundle.option_index(c->handle), config, rng);
        if (!facet) continue;
        Task t;
        t.id = task_id(bundle, "filter", filter.size() + 1);
        t.type = TaskType::shopping;
        t.intent = filter_intent(*c, *facet);
        t.success_criteria.url_contains = "/collections/" + c->handle;
        t.success_criteria.type = "navigation";
        t.facet = facet;
        filter.push_back(std::move(t));
    }
    browse.insert(browse.end(), std::make_move_iterator(filter.begin()), std::make_move_iterator(filter.end()));
    return browse;
}

std::vector<Task> gen_policy(const ShopBundle& bundle) {
    std::vector<Task> out;
    const PolicySpec shipping{"shipping", {"shipping", "delivery"}, "shipping-policy", &kShippingIntent};
    const PolicySpec returns{"returns", {"return", "refund", "exchange"}, "refund-policy", &kReturnsIntent};
    for (const auto* spec : {&shipping, &returns}) {
        if (auto task = policy_task(bundle, *spec)) out.push_back(std::move(*task));
    }
    return out;
}

std::vector<Task> generate_short_tasks(const ShopBundle& bundle, const GeneratorConfig& config) {
    std::vector<Task> tasks = gen_discovery(bundle, config.discovery_limit);
    auto more = gen_browse_filter(bundle, config);
    tasks.insert(tasks.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    more = gen_policy(bundle);
    tasks.insert(tasks.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    return tasks;
}

std::string task_skill(const Task& task, const std::string& shop_slug) {
    const std::string prefix = shop_slug + "-";
    if (task.id.rfind(prefix, 0) != 0) return {};
    const std::string rest = task.id.substr(prefix.size());
    const auto dash = rest.rfind('-');
    if (dash == std::string::npos) return {};
    return rest.substr(0, dash);
}

BenchmarkFile assemble_benchmark(const ShopBundle& bundle, std::vector<Task> short_tasks, std::vector<Task> journey_tasks) {
    std::set<std::string> ids;
    for (const auto* list : {&short_tasks, &journey_tasks}) {
        for (const auto& t : *list) {
            if (!ids.insert(t.id).second) throw AssemblyError("duplicate task id " + t.id);
        }
    }
    auto rank = [&](const Task& t) {
        const std::string skill = task_skill(t, bundle.shop_slug());
        const auto& order = skill_order();
        const auto it = std::find(order.begin(), order.end(), skill);
        return static_cast<std::size_t>(it - order.begin());
    };
    auto index = [](const Task& t) -> long long {
        const auto dash = t.id.rfind('-');
        try {
            return std::stoll(t.id.substr(dash + 1));
        } catch (const std::exception&) {
            return 0;
        }
    };
    std::stable_sort(short_tasks.begin(), short_tasks.end(), [&](const Task& a, const Task& b) {
        const auto ra = rank(a);
        const auto rb = rank(b);
        if (ra != rb) return ra < rb;
        return index(a) < index(b);
    });
    std::stable_sort(journey_tasks.begin(), journey_tasks.end(),
                     [&](const Task& a, const Task& b) { return index(a) < index(b); });

    BenchmarkFile file;
    file.shop_slug = bundle.shop_slug();
    for (auto& t : short_tasks) {
        t.bundle_tag = BundleTag::easy_short_horizon;
        file.easy_short_horizon.push_back(t.id);
        file.tasks.push_back(std::move(t));
    }
    for (auto& t : journey_tasks) {
        t.bundle_tag = BundleTag::hard_long_horizon;
        file.hard_long_horizon.push_back(t.id);
        file.tasks.push_back(std::move(t));
    }
    const auto issues = validate(file.tasks, bundle);
    const auto errors = std::count_if(issues.begin(), issues.end(),
                                      [](const Issue& i) { return i.severity == Severity::error; });
    if (errors > 0) {
        throw AssemblyError("refusing to assemble: " + std::to_string(errors) + " validation error(s)\n" +
                            exit_disposition(issues).report);
    }
    return file;
}

std::vector<Task> apply_overrides(std::vector<Task> tasks, const std::filesystem::path& directory) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(directory)) return tasks;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::ifstream in(path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        std::vector<Task> overrides;
        try {
            overrides = tasks_from_document(parse_json_lenient(buffer.str()));
        } catch (const nlohmann::json::parse_error& err) {
            throw TaskSchemaError(path.string() + ": " + err.what());
        }
        for (auto& o : overrides) {
            auto it = std::find_if(tasks.begin(), tasks.end(), [&](const Task& t) { return t.id == o.id; });
            if (it != tasks.end()) {
                *it = std::move(o);
            } else {
                tasks.push_back(std::move(o));
            }
        }
    }
    return tasks;
}

}  // namespace storebench
