#include "storebench/analyzer.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdio>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

#include "storebench/catalog.hpp"
#include "storebench/storefront.hpp"

namespace storebench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Complexity

namespace {

bool outside_tree(const HtmlNode& node) {
    return node.tag == "head" || node.tag == "script" || node.tag == "style" || node.tag == "template";
}

std::string input_type(const HtmlNode& node) { return to_lower(node.attr_or("type", "text")); }

bool is_fill(const HtmlNode& node) {
    if (node.tag == "textarea") return true;
    if (const std::string* editable = node.attr("contenteditable"); editable && to_lower(*editable) != "false") return true;
    if (node.tag != "input") return false;
    static const std::set<std::string> non_text{"hidden", "submit", "button", "reset",  "image",
                                                "checkbox", "radio", "file",  "range", "color"};
    return !non_text.count(input_type(node));
}

bool is_click(const HtmlNode& node) {
    if (node.tag == "a" || node.tag == "button" || node.tag == "summary") return true;
    if (node.tag != "input") return false;
    static const std::set<std::string> clickable{"submit", "button", "reset", "image", "checkbox", "radio", "file"};
    return clickable.count(input_type(node)) > 0;
}

bool is_choice(const HtmlNode& node) { return node.tag == "select"; }

bool is_interactive(const HtmlNode& node) {
    return is_fill(node) || is_click(node) || is_choice(node) || node.tag == "input" || node.tag == "option" ||
           node.has_attr("tabindex");
}

bool exempt_from_collapse(const HtmlNode& node) {
    static const std::set<std::string> landmarks{"html", "body", "nav", "main", "header", "footer", "form", "dialog"};
    return landmarks.count(node.tag) > 0 || node.has_attr("role");
}

bool has_own_text(const HtmlNode& node) {
    return std::any_of(node.children.begin(), node.children.end(), [](const HtmlNode& c) {
        return c.is_text() && std::any_of(c.text.begin(), c.text.end(), [](char ch) {
                   return !std::isspace(static_cast<unsigned char>(ch));
               });
    });
}

std::vector<const HtmlNode*> tree_children(const HtmlNode& node) {
    std::vector<const HtmlNode*> out;
    for (const auto& c : node.children) {
        if (c.is_element() && !outside_tree(c)) out.push_back(&c);
    }
    return out;
}

int depth_of(const HtmlNode& node) {
    const auto children = tree_children(node);
    // Wrapper collapse: the element is replaced by its only child.
    if (children.size() == 1 && !has_own_text(node) && !is_interactive(node) && !exempt_from_collapse(node)) {
        return depth_of(*children.front());
    }
    int deepest = 0;
    for (const HtmlNode* c : children) deepest = std::max(deepest, depth_of(*c));
    return 1 + deepest;
}

void count_elements(const HtmlNode& node, PageComplexity& out) {
    for (const auto& c : node.children) {
        if (!c.is_element() || outside_tree(c)) continue;
        if (is_fill(c)) ++out.fill_count;
        if (is_click(c)) ++out.click_count;
        if (is_choice(c)) ++out.choice_count;
        count_elements(c, out);
    }
}

}  // namespace

int simplified_depth(const HtmlNode& root) {
    if (root.is_element()) return depth_of(root);
    int deepest = 0;
    for (const HtmlNode* c : tree_children(root)) deepest = std::max(deepest, depth_of(*c));
    return deepest;
}

PageComplexity complexity(const HtmlNode& root) {
    PageComplexity out;
    out.tree_depth = simplified_depth(root);
    if (root.is_element() && !outside_tree(root)) {
        HtmlNode wrapper;
        wrapper.tag = "#document";
        wrapper.children.push_back(root);
        count_elements(wrapper, out);
    } else {
        count_elements(root, out);
    }
    return out;
}

PageComplexity complexity(std::string_view html_document) { return complexity(parse_html(html_document, HtmlMode::strict)); }

// ---------------------------------------------------------------------------
// Graph

std::string UIState::label() const {
    if (config == kBaseConfig) return route;
    std::string surface = config;
    if (surface.size() > 5 && surface.compare(surface.size() - 5, 5, "_open") == 0) surface.resize(surface.size() - 5);
    return route + ":" + surface;
}

std::size_t TransitionGraph::out_degree(const UIState& state) const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.from == state; }));
}

double TransitionGraph::avg_out_degree() const {
    return nodes.empty() ? 0.0 : static_cast<double>(edges.size()) / static_cast<double>(nodes.size());
}

bool TransitionGraph::closed() const {
    const std::set<UIState> node_set(nodes.begin(), nodes.end());
    if (node_set.size() != nodes.size()) return false;
    std::set<Edge> seen;
    for (const auto& e : edges) {
        if (!node_set.count(e.from) || !node_set.count(e.to)) return false;
        if (!seen.insert(e).second) return false;
    }
    return true;
}

void TransitionGraph::canonicalize() {
    std::sort(nodes.begin(), nodes.end());
    std::sort(edges.begin(), edges.end());
}

json to_json(const TransitionGraph& graph) {
    json nodes = json::array();
    for (const auto& n : graph.nodes) {
        nodes.push_back(json{{"route", n.route}, {"config", n.config}, {"label", n.label()}, {"out_degree", graph.out_degree(n)}});
    }
    json edges = json::array();
    for (const auto& e : graph.edges) edges.push_back(json{{"from", e.from.label()}, {"to", e.to.label()}, {"action", e.action}});
    return json{{"nodes", nodes},
                {"edges", edges},
                {"avg_out_degree", graph.avg_out_degree()},
                {"fetch_errors", graph.fetch_errors}};
}

// ---------------------------------------------------------------------------
// Fetchers

namespace {

class StorefrontFetcher : public Fetcher {
public:
    explicit StorefrontFetcher(Storefront& storefront) : storefront_(storefront) {}

    FetchResult fetch(const std::string& target) override {
        Request request;
        request.target = target;
        Response response = storefront_.handle(request);
        return FetchResult{response.status, std::move(response.body), {}};
    }

    Origin origin() const override { return Origin{"http", "storefront.local", 80, "/"}; }

private:
    Storefront& storefront_;
};

class HttpFetcher : public Fetcher {
public:
    explicit HttpFetcher(const std::string& base_url) : origin_(parse_origin(base_url)) {}

    FetchResult fetch(const std::string& target) override {
        // httplib clients are not shared across threads.
        httplib::Client client(origin_.scheme + "://" + origin_.host + ":" + std::to_string(origin_.port));
        client.set_connection_timeout(5);
        client.set_read_timeout(15);
        auto res = client.Get(target);
        if (!res) return FetchResult{0, {}, httplib::to_string(res.error())};
        return FetchResult{res->status, res->body, {}};
    }

    Origin origin() const override { return origin_; }

private:
    Origin origin_;
};

class StaticFetcher : public Fetcher {
public:
    explicit StaticFetcher(std::map<std::string, std::string> pages) : pages_(std::move(pages)) {}

    FetchResult fetch(const std::string& target) override {
        auto it = pages_.find(split_target(target).path);
        if (it == pages_.end()) return FetchResult{404, "<html><body><h1>Not found</h1></body></html>", {}};
        return FetchResult{200, it->second, {}};
    }

    Origin origin() const override { return Origin{"http", "static.local", 80, "/"}; }

private:
    std::map<std::string, std::string> pages_;
};

}  // namespace

std::unique_ptr<Fetcher> make_storefront_fetcher(Storefront& storefront) {
    return std::make_unique<StorefrontFetcher>(storefront);
}

std::unique_ptr<Fetcher> make_http_fetcher(const std::string& base_url) {
    try {
        return std::make_unique<HttpFetcher>(base_url);
    } catch (const std::invalid_argument& e) {
        throw CrawlError(std::string("bad base url: ") + e.what());
    }
}

std::unique_ptr<Fetcher> make_static_fetcher(std::map<std::string, std::string> pages) {
    return std::make_unique<StaticFetcher>(std::move(pages));
}

// ---------------------------------------------------------------------------
// Surfaces

bool SurfaceRule::matches(const HtmlNode& node) const {
    if (!node.is_element()) return false;
    if (!tag.empty() && node.tag != tag) return false;
    if (attribute.empty()) return true;
    const std::string* v = node.attr(attribute);
    if (!v) return false;
    // An empty expected value with no surface name means "the attribute names the surface".
    return !value || *v == *value;
}

SurfaceRule parse_surface_rule(std::string_view spec) {
    const auto eq = spec.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw std::invalid_argument("surface rule must look like surface=selector: " + std::string(spec));
    }
    SurfaceRule rule;
    rule.surface = std::string(spec.substr(0, eq));
    std::string_view selector = spec.substr(eq + 1);
    const auto open = selector.find('[');
    rule.tag = to_lower(selector.substr(0, open));
    if (open != std::string_view::npos) {
        if (selector.back() != ']') throw std::invalid_argument("unterminated attribute selector: " + std::string(spec));
        std::string_view inner = selector.substr(open + 1, selector.size() - open - 2);
        const auto inner_eq = inner.find('=');
        rule.attribute = to_lower(inner.substr(0, inner_eq));
        if (inner_eq != std::string_view::npos) {
            std::string value(inner.substr(inner_eq + 1));
            if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
                value = value.substr(1, value.size() - 2);
            }
            rule.value = value;
        }
    }
    if (rule.tag.empty() && rule.attribute.empty()) throw std::invalid_argument("empty selector: " + std::string(spec));
    return rule;
}

std::vector<SurfaceRule> declarative_surface_rules() {
    std::vector<SurfaceRule> rules;
    for (auto name : kSurfaceNames) rules.push_back(SurfaceRule{std::string(name), "", "data-sg-surface", std::string(name)});
    return rules;
}

std::vector<SurfaceRule> heuristic_surface_rules() {
    return {
        parse_surface_rule("navigation=menu-drawer"),
        parse_surface_rule("navigation=[id=menu-drawer]"),
        parse_surface_rule("cart_drawer=cart-drawer"),
        parse_surface_rule("cart_drawer=[id=cart-drawer]"),
        parse_surface_rule("search=predictive-search"),
        parse_surface_rule("search=details-modal[class=header__search]"),
        parse_surface_rule("filter_panel=facet-filters-form"),
        parse_surface_rule("filter_panel=[id=FacetFiltersForm]"),
        parse_surface_rule("sort=[id=SortBy]"),
    };
}

std::string collapse_route(const std::string& path) {
    for (const char* kind : {"/products/", "/collections/", "/pages/", "/policies/"}) {
        const std::string prefix = kind;
        if (path.size() > prefix.size() && path.compare(0, prefix.size(), prefix) == 0) return prefix + ":handle";
    }
    return path;
}

// ---------------------------------------------------------------------------
// Crawl

namespace {

std::string normalize_route(const std::string& path, const CrawlLimits& limits) {
    return limits.collapse_routes ? collapse_route(path) : path;
}

std::vector<SurfaceRule> all_rules(const CrawlLimits& limits) {
    auto rules = declarative_surface_rules();
    rules.insert(rules.end(), limits.surface_rules.begin(), limits.surface_rules.end());
    return rules;
}

const SurfaceRule* surface_of(const HtmlNode& node, const std::vector<SurfaceRule>& rules) {
    for (const auto& rule : rules) {
        if (rule.matches(node)) return &rule;
    }
    return nullptr;
}

std::string open_config(const std::string& surface) { return surface + "_open"; }

/// Same-origin link paths in document order, without duplicates.
std::vector<std::string> link_paths(const HtmlNode& document, const Origin& origin, const std::string& current) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    walk_elements(document, [&](const HtmlNode& node) {
        if (node.tag != "a") return;
        const std::string* href = node.attr("href");
        if (!href) return;
        auto resolved = resolve_href(origin, current, decode_entities(*href));
        if (!resolved) return;
        std::string path = split_target(*resolved).path;
        if (seen.insert(path).second) out.push_back(std::move(path));
    });
    return out;
}

}  // namespace

std::vector<Edge> page_edges(const std::string& route, const HtmlNode& document, const Origin& origin,
                             const CrawlLimits& limits) {
    const auto rules = all_rules(limits);
    const std::string from_route = normalize_route(route, limits);
    std::vector<Edge> out;
    std::set<Edge> seen;
    auto add = [&](Edge e) {
        if (e.from == e.to) return;
        if (seen.insert(e).second) out.push_back(std::move(e));
    };
    std::vector<std::string> surfaces;
    walk_elements_with_ancestors(document, [&](const HtmlNode& node, const std::vector<const HtmlNode*>& ancestors) {
        if (const SurfaceRule* rule = surface_of(node, rules)) {
            if (std::find(surfaces.begin(), surfaces.end(), rule->surface) == surfaces.end()) surfaces.push_back(rule->surface);
        }
        if (node.tag != "a") return;
        const std::string* href = node.attr("href");
        if (!href) return;
        auto resolved = resolve_href(origin, route, decode_entities(*href));
        if (!resolved) return;
        const std::string target = normalize_route(split_target(*resolved).path, limits);
        UIState from{from_route, std::string(kBaseConfig)};
        for (auto it = ancestors.rbegin(); it != ancestors.rend(); ++it) {
            if (const SurfaceRule* rule = surface_of(**it, rules)) {
                from.config = open_config(rule->surface);
                break;
            }
        }
        add(Edge{from, UIState{target, std::string(kBaseConfig)}, "click:" + target});
    });
    for (const auto& surface : surfaces) {
        add(Edge{UIState{from_route, std::string(kBaseConfig)}, UIState{from_route, open_config(surface)}, "open:" + surface});
        add(Edge{UIState{from_route, open_config(surface)}, UIState{from_route, std::string(kBaseConfig)}, "close:" + surface});
    }
    return out;
}

CrawlResult crawl(Fetcher& fetcher, const CrawlLimits& limits) {
    const Origin origin = fetcher.origin();
    CrawlResult result;
    TransitionGraph& graph = result.graph;
    std::set<UIState> node_set;
    std::set<Edge> edge_set;
    auto add_node = [&](const UIState& s) {
        if (node_set.insert(s).second) graph.nodes.push_back(s);
    };

    std::set<std::string> scheduled{origin.base_path};
    std::vector<std::string> level{origin.base_path};
    std::size_t fetched = 0;
    add_node(UIState{normalize_route(origin.base_path, limits), std::string(kBaseConfig)});

    for (std::size_t depth = 0; !level.empty() && depth <= limits.max_depth && fetched < limits.max_pages; ++depth) {
        const std::size_t take = std::min(level.size(), limits.max_pages - fetched);
        std::vector<FetchResult> responses(take);
        // Fetch in bounded batches; assembly below stays in breadth-first order.
        const std::size_t width = std::max<std::size_t>(1, limits.concurrency);
        for (std::size_t start = 0; start < take; start += width) {
            std::vector<std::future<FetchResult>> batch;
            for (std::size_t i = start; i < std::min(take, start + width); ++i) {
                batch.push_back(std::async(std::launch::async, [&fetcher, path = level[i]] { return fetcher.fetch(path); }));
            }
            for (std::size_t i = 0; i < batch.size(); ++i) responses[start + i] = batch[i].get();
        }
        fetched += take;
        if (depth == 0 && responses.front().status == 0) {
            throw CrawlError("cannot reach " + origin.to_string() + ": " + responses.front().error);
        }

        std::vector<std::string> next;
        for (std::size_t i = 0; i < take; ++i) {
            const std::string& path = level[i];
            const std::string route = normalize_route(path, limits);
            add_node(UIState{route, std::string(kBaseConfig)});
            const FetchResult& r = responses[i];
            if (!r.ok()) {
                graph.fetch_errors[route] = r.status == 0 ? r.error : "HTTP " + std::to_string(r.status);
                continue;
            }
            const HtmlNode document = parse_html(r.body, HtmlMode::lenient);
            result.pages.push_back(PageRecord{route, complexity(document)});
            for (auto& e : page_edges(path, document, origin, limits)) {
                add_node(e.from);
                add_node(e.to);
                if (edge_set.insert(e).second) graph.edges.push_back(std::move(e));
            }
            for (auto& target : link_paths(document, origin, path)) {
                if (scheduled.insert(target).second) next.push_back(std::move(target));
            }
        }
        level = std::move(next);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Reports

ComplexityReport make_report(std::string name, const CrawlResult& crawl) {
    ComplexityReport r;
    r.name = std::move(name);
    r.pages = crawl.pages.size();
    r.nodes = crawl.graph.nodes.size();
    r.edges = crawl.graph.edges.size();
    r.avg_out_degree = crawl.graph.avg_out_degree();
    if (!crawl.pages.empty()) {
        const double n = static_cast<double>(crawl.pages.size());
        for (const auto& page : crawl.pages) {
            r.tree_depth += page.complexity.tree_depth / n;
            r.fill_count += page.complexity.fill_count / n;
            r.click_count += page.complexity.click_count / n;
            r.choice_count += page.complexity.choice_count / n;
        }
    }
    return r;
}

json to_json(const ComplexityReport& r) {
    return json{{"name", r.name},
                {"tree_depth", r.tree_depth},
                {"fill_count", r.fill_count},
                {"click_count", r.click_count},
                {"choice_count", r.choice_count},
                {"pages", r.pages},
                {"graph", {{"nodes", r.nodes}, {"edges", r.edges}, {"avg_out_degree", r.avg_out_degree}}}};
}

ComplexityReport report_from_json(const json& j) {
    try {
        ComplexityReport r;
        r.name = j.value("name", std::string());
        r.tree_depth = j.at("tree_depth").get<double>();
        r.fill_count = j.at("fill_count").get<double>();
        r.click_count = j.at("click_count").get<double>();
        r.choice_count = j.at("choice_count").get<double>();
        r.pages = j.value("pages", std::size_t{0});
        const json& g = j.at("graph");
        r.nodes = g.at("nodes").get<std::size_t>();
        r.edges = g.at("edges").get<std::size_t>();
        r.avg_out_degree = g.at("avg_out_degree").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed complexity report: ") + e.what());
    }
}

double metric_value(const ComplexityReport& r, std::string_view metric) {
    if (metric == "nodes") return static_cast<double>(r.nodes);
    if (metric == "edges") return static_cast<double>(r.edges);
    if (metric == "avg_out_degree") return r.avg_out_degree;
    if (metric == "tree_depth") return r.tree_depth;
    if (metric == "fill") return r.fill_count;
    if (metric == "click") return r.click_count;
    if (metric == "choice") return r.choice_count;
    throw std::invalid_argument("unknown metric " + std::string(metric));
}

namespace {

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

Comparison compare_report(const std::vector<ComplexityReport>& reports) {
    if (reports.size() < 2) throw std::invalid_argument("comparison needs at least two reports");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        names.push_back(reports[i].name.empty() ? "report-" + std::to_string(i + 1) : reports[i].name);
    }
    json metrics = json::object();
    std::vector<std::vector<std::string>> rows;
    for (const auto& metric : report_metrics()) {
        std::vector<double> values;
        for (const auto& r : reports) values.push_back(metric_value(r, metric));
        const double lo = *std::min_element(values.begin(), values.end());
        const double hi = *std::max_element(values.begin(), values.end());
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        json by_name = json::object();
        json deltas = json::object();
        std::vector<std::string> row{metric};
        for (std::size_t i = 0; i < values.size(); ++i) {
            by_name[names[i]] = values[i];
            deltas[names[i]] = values[i] - values.front();
            row.push_back(fixed(values[i]));
        }
        row.push_back(fixed(lo));
        row.push_back(fixed(hi));
        row.push_back(fixed(mean));
        for (std::size_t i = 1; i < values.size(); ++i) row.push_back(fixed(values[i] - values.front()));
        metrics[metric] = json{{"values", by_name}, {"min", lo}, {"max", hi}, {"mean", mean}, {"delta_vs_first", deltas}};
        rows.push_back(std::move(row));
    }

    std::vector<std::string> header{"metric"};
    header.insert(header.end(), names.begin(), names.end());
    for (const char* h : {"min", "max", "mean"}) header.emplace_back(h);
    for (std::size_t i = 1; i < names.size(); ++i) header.push_back("delta(" + names[i] + ")");
    std::vector<std::size_t> widths(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        widths[c] = header[c].size();
        for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
    }
    std::ostringstream table;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) table << "  ";
            table << cells[c] << std::string(widths[c] - cells[c].size(), ' ');
        }
        table << "\n";
    };
    emit(header);
    for (const auto& row : rows) emit(row);

    return Comparison{json{{"reports", names}, {"metrics", metrics}}, table.str()};
}

}  // namespace storebench
