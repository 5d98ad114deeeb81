#include <doctest.h>

#include <set>

#include "storebench/analyzer.hpp"
#include "storebench/fixtures.hpp"
#include "storebench/storefront.hpp"
#include "oracles.hpp"

using namespace storebench;
using nlohmann::json;
namespace t = storebench::testing;

namespace {

UIState base(std::string route) { return UIState{std::move(route), std::string(kBaseConfig)}; }
UIState open(std::string route, const std::string& surface) { return UIState{std::move(route), surface + "_open"}; }

}  // namespace

TEST_CASE("complexity of small documents") {
    const PageComplexity nested =
        complexity("<html><head><title>t</title></head><body><div><div><a href=\"#\">x</a></div></div></body></html>");
    CHECK(nested == PageComplexity{3, 0, 1, 0});

    const PageComplexity form = complexity(
        "<html><body><form><input type=\"text\"><input type=\"checkbox\"><textarea></textarea>"
        "<select><option>1</option><option>2</option></select><button>Go</button>"
        "<input type=\"hidden\" name=\"k\"></form><script>var a = '<a href=x>';</script></body></html>");
    CHECK(form.tree_depth == 5);
    CHECK(form.fill_count == 2);
    CHECK(form.click_count == 2);
    CHECK(form.choice_count == 1);

    // A wrapper with its own text is kept.
    CHECK(complexity("<html><body><div>label<span><a href=\"#\">x</a></span></div></body></html>").tree_depth == 4);
    CHECK(complexity("<html><body><p contenteditable=\"true\">edit</p></body></html>").fill_count == 1);
    CHECK_THROWS_AS(complexity("<div><span></div>"), HtmlParseError);
}

TEST_CASE("a hand-drawn five-page site produces the exact graph") {
    auto fetcher = make_static_fetcher(t::five_page_site());
    CrawlResult r = crawl(*fetcher);
    TransitionGraph& g = r.graph;

    const std::set<UIState> nodes(g.nodes.begin(), g.nodes.end());
    CHECK(nodes == std::set<UIState>{base("/"), open("/", "navigation"), base("/a"), base("/b"), base("/c"), base("/d"),
                                     base("/missing")});
    const std::set<Edge> edges(g.edges.begin(), g.edges.end());
    const std::set<Edge> expected{
        {open("/", "navigation"), base("/a"), "click:/a"},
        {open("/", "navigation"), base("/b"), "click:/b"},
        {base("/"), base("/c"), "click:/c"},
        {base("/"), open("/", "navigation"), "open:navigation"},
        {open("/", "navigation"), base("/"), "close:navigation"},
        {base("/a"), base("/"), "click:/"},
        {base("/a"), base("/b"), "click:/b"},
        {base("/b"), base("/d"), "click:/d"},
        {base("/c"), base("/a"), "click:/a"},
        {base("/d"), base("/missing"), "click:/missing"},
    };
    CHECK(edges == expected);
    CHECK(g.edges.size() == expected.size());
    CHECK(g.out_degree(base("/")) == 2);
    CHECK(g.out_degree(open("/", "navigation")) == 3);
    CHECK(g.out_degree(base("/missing")) == 0);
    CHECK(g.avg_out_degree() == doctest::Approx(10.0 / 7.0));
    CHECK(g.closed());
    CHECK(r.pages.size() == 5);
    CHECK(g.fetch_errors == std::map<std::string, std::string>{{"/missing", "HTTP 404"}});
    CHECK(open("/", "navigation").label() == "/:navigation");
}

TEST_CASE("crawl limits bound depth and page count") {
    auto fetcher = make_static_fetcher(t::five_page_site());
    CrawlLimits shallow;
    shallow.max_depth = 0;
    CHECK(crawl(*fetcher, shallow).pages.size() == 1);
    CrawlLimits few;
    few.max_pages = 3;
    CHECK(crawl(*fetcher, few).pages.size() == 3);
    CrawlLimits serial;
    serial.concurrency = 1;
    TransitionGraph a = crawl(*fetcher, serial).graph;
    TransitionGraph b = crawl(*fetcher).graph;
    CHECK(a.nodes == b.nodes);
    CHECK(a.edges == b.edges);
}

TEST_CASE("a two-page site with a custom surface rule") {
    auto fetcher = make_static_fetcher({
        {"/", R"(<html><body><cart-drawer><a href="/cart">Cart</a></cart-drawer></body></html>)"},
        {"/cart", R"(<html><body><a href="/">Back</a></body></html>)"},
    });
    CHECK(crawl(*fetcher).graph.nodes.size() == 2);
    CrawlLimits limits;
    limits.surface_rules.push_back(parse_surface_rule("cart_drawer=cart-drawer"));
    const TransitionGraph g = crawl(*fetcher, limits).graph;
    CHECK(g.nodes.size() == 3);
    CHECK(g.edges.size() == 4);
    CHECK(g.out_degree(open("/", "cart_drawer")) == 2);
}

TEST_CASE("surface rules parse selectors") {
    const SurfaceRule tag = parse_surface_rule("cart_drawer=cart-drawer");
    CHECK(tag.surface == "cart_drawer");
    CHECK(tag.tag == "cart-drawer");
    const SurfaceRule attr = parse_surface_rule("navigation=[id=menu-drawer]");
    CHECK(attr.attribute == "id");
    CHECK(attr.value == "menu-drawer");
    const SurfaceRule both = parse_surface_rule("sort=select[name]");
    CHECK(both.tag == "select");
    CHECK_FALSE(both.value.has_value());
    CHECK_THROWS(parse_surface_rule("no-equals"));
    CHECK_FALSE(heuristic_surface_rules().empty());
}

TEST_CASE("crawling a fixture reaches exactly its route table") {
    for (const auto& name : fixture_names()) {
        CAPTURE(name);
        const ShopBundle bundle = fixture_shop(name);
        Storefront sf(bundle);
        auto fetcher = make_storefront_fetcher(sf);
        const CrawlResult r = crawl(*fetcher);
        std::set<std::string> routes;
        std::size_t surface_states = 0;
        for (const auto& node : r.graph.nodes) {
            if (node.config == kBaseConfig) {
                routes.insert(node.route);
            } else {
                ++surface_states;
            }
        }
        const auto expected = t::expected_routes(bundle);
        CHECK(routes == expected);
        CHECK(r.graph.fetch_errors.empty());
        CHECK(r.pages.size() == expected.size());
        // Every page has the navigation, search and cart surfaces; collection pages add filter and sort.
        CHECK(surface_states == 3 * expected.size() + 2 * bundle.collections().size());
        CHECK(r.graph.closed());

        std::size_t out_sum = 0;
        for (const auto& node : r.graph.nodes) out_sum += r.graph.out_degree(node);
        CHECK(out_sum == r.graph.edges.size());
    }
}

TEST_CASE("route collapsing merges detail pages") {
    CHECK(collapse_route("/products/anvil-pro") == "/products/:handle");
    CHECK(collapse_route("/collections/all") == "/collections/:handle");
    CHECK(collapse_route("/products/") == "/products/");
    CHECK(collapse_route("/cart") == "/cart");

    Storefront sf(fixture_shop("tiny"));
    auto fetcher = make_storefront_fetcher(sf);
    CrawlLimits limits;
    limits.collapse_routes = true;
    const CrawlResult r = crawl(*fetcher, limits);
    std::set<std::string> routes;
    for (const auto& node : r.graph.nodes) {
        if (node.config == kBaseConfig) routes.insert(node.route);
    }
    CHECK(routes == std::set<std::string>{"/", "/search", "/cart", "/collections/:handle", "/products/:handle",
                                          "/policies/:handle", "/pages/:handle"});
    CHECK(r.graph.closed());
}

TEST_CASE("crawls are deterministic") {
    Storefront sf(fixture_shop("mock_clothing"));
    auto fetcher = make_storefront_fetcher(sf);
    TransitionGraph a = crawl(*fetcher).graph;
    TransitionGraph b = crawl(*fetcher).graph;
    CHECK(to_json(a) == to_json(b));
    a.canonicalize();
    b.canonicalize();
    CHECK(a.nodes == b.nodes);
}

TEST_CASE("an unreachable start page is a crawl error") {
    auto fetcher = make_http_fetcher("http://127.0.0.1:1");
    CHECK_THROWS_AS(crawl(*fetcher), CrawlError);
}

TEST_CASE("reports round-trip and compare") {
    auto fetcher = make_static_fetcher(t::five_page_site());
    const ComplexityReport a = make_report("static", crawl(*fetcher));
    CHECK(a.pages == 5);
    CHECK(a.nodes == 7);
    CHECK(a.edges == 10);
    CHECK(a.avg_out_degree == doctest::Approx(10.0 / 7.0));
    const ComplexityReport back = report_from_json(to_json(a));
    CHECK(to_json(back) == to_json(a));
    CHECK(metric_value(a, "edges") == 10);

    ComplexityReport b = a;
    b.name = "other";
    b.edges = 14;
    const Comparison c = compare_report({a, b});
    CHECK(c.document["metrics"]["edges"]["min"] == 10);
    CHECK(c.document["metrics"]["edges"]["max"] == 14);
    CHECK(c.document["metrics"]["edges"]["mean"] == 12);
    CHECK(c.document["metrics"]["edges"]["delta_vs_first"]["other"] == 4);
    CHECK(c.table.find("delta(other)") != std::string::npos);
    CHECK_THROWS_AS(compare_report({a}), std::invalid_argument);
}
