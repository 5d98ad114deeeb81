#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "storebench/html.hpp"
#include "storebench/url.hpp"

namespace storebench {

class Storefront;

// ---------------------------------------------------------------------------
// Element-level complexity

struct PageComplexity {
    int tree_depth = 0;
    int fill_count = 0;
    int click_count = 0;
    int choice_count = 0;
    bool operator==(const PageComplexity&) const = default;
};

/// Simplifies the element tree (wrapper collapse) and counts interactive elements.
/// Throws HtmlParseError on malformed markup.
PageComplexity complexity(std::string_view html_document);
PageComplexity complexity(const HtmlNode& root);

/// Depth of the simplified tree rooted at `root` (the document node itself does not count).
int simplified_depth(const HtmlNode& root);

// ---------------------------------------------------------------------------
// State-transition graph

inline constexpr std::string_view kBaseConfig = "base";

struct UIState {
    std::string route;
    /// "base" or "<surface>_open".
    std::string config = std::string(kBaseConfig);

    /// "/path" for base states, "/path:<surface>" otherwise.
    std::string label() const;
    auto operator<=>(const UIState&) const = default;
};

struct Edge {
    UIState from;
    UIState to;
    std::string action;
    auto operator<=>(const Edge&) const = default;
};

struct TransitionGraph {
    std::vector<UIState> nodes;
    std::vector<Edge> edges;
    /// Fetch problems keyed by route.
    std::map<std::string, std::string> fetch_errors;

    std::size_t out_degree(const UIState& state) const;
    double avg_out_degree() const;
    /// Every edge endpoint is a node and no triple repeats.
    bool closed() const;
    /// Nodes and edges in canonical order, for comparisons across crawls.
    void canonicalize();
};

nlohmann::json to_json(const TransitionGraph& graph);

// ---------------------------------------------------------------------------
// Fetching

struct FetchResult {
    /// 0 when the request never produced an HTTP response.
    int status = 0;
    std::string body;
    std::string error;
    bool ok() const { return status >= 200 && status < 300; }
};

class Fetcher {
public:
    virtual ~Fetcher() = default;
    /// `target` is "/path?query" on the crawled origin. Must be safe to call from several threads.
    virtual FetchResult fetch(const std::string& target) = 0;
    /// Origin used to resolve absolute links; the crawl starts at its base path.
    virtual Origin origin() const = 0;
};

/// Calls the engine directly, without a socket.
std::unique_ptr<Fetcher> make_storefront_fetcher(Storefront& storefront);
/// GET over HTTP against `base_url`.
std::unique_ptr<Fetcher> make_http_fetcher(const std::string& base_url);
/// Serves fixed documents keyed by path; anything else is a 404.
std::unique_ptr<Fetcher> make_static_fetcher(std::map<std::string, std::string> pages);

/// Matches an element that marks a toggleable surface: "tag", "[attr]", "[attr=value]" or "tag[attr=value]".
struct SurfaceRule {
    std::string surface;
    std::string tag;
    std::string attribute;
    std::optional<std::string> value;

    bool matches(const HtmlNode& node) const;
};

/// Parses "surface=selector", e.g. "cart_drawer=cart-drawer" or "navigation=[id=menu-drawer]".
SurfaceRule parse_surface_rule(std::string_view spec);

/// Any element carrying data-sg-surface names the surface it holds.
std::vector<SurfaceRule> declarative_surface_rules();

/// Selectors for common third-party theme markup.
std::vector<SurfaceRule> heuristic_surface_rules();

class CrawlError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CrawlLimits {
    std::size_t max_pages = 1000;
    std::size_t max_depth = 10;
    std::size_t concurrency = 4;
    /// Map "/products/x" to "/products/:handle" (and likewise for collections, pages, policies).
    bool collapse_routes = false;
    /// Extra rules applied after the declarative one.
    std::vector<SurfaceRule> surface_rules;
};

/// "/products/:handle" style pattern for a concrete path.
std::string collapse_route(const std::string& path);

struct PageRecord {
    std::string route;
    PageComplexity complexity;
};

struct CrawlResult {
    TransitionGraph graph;
    /// Successfully fetched pages, in breadth-first order.
    std::vector<PageRecord> pages;
};

/// Breadth-first crawl from the fetcher's base path. Throws CrawlError when the start page cannot be reached.
CrawlResult crawl(Fetcher& fetcher, const CrawlLimits& limits = {});

/// Edges contributed by one page: links outside surfaces leave the base state, links inside
/// surface c leave the c-open state, and every surface adds open/close toggles.
std::vector<Edge> page_edges(const std::string& route, const HtmlNode& document, const Origin& origin,
                             const CrawlLimits& limits);

// ---------------------------------------------------------------------------
// Reports

struct ComplexityReport {
    std::string name;
    /// Means over crawled pages.
    double tree_depth = 0;
    double fill_count = 0;
    double click_count = 0;
    double choice_count = 0;
    std::size_t pages = 0;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double avg_out_degree = 0;
};

ComplexityReport make_report(std::string name, const CrawlResult& crawl);
nlohmann::json to_json(const ComplexityReport& report);
ComplexityReport report_from_json(const nlohmann::json& j);

inline const std::vector<std::string>& report_metrics() {
    static const std::vector<std::string> metrics{"nodes", "edges", "avg_out_degree", "tree_depth",
                                                  "fill",  "click", "choice"};
    return metrics;
}

double metric_value(const ComplexityReport& report, std::string_view metric);

struct Comparison {
    nlohmann::json document;
    std::string table;
};

/// Per-metric values with min, max, mean and deltas against the first report. Needs at least two reports.
Comparison compare_report(const std::vector<ComplexityReport>& reports);

}  // namespace storebench
