#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "storebench/catalog.hpp"
#include "storebench/html.hpp"
#include "storebench/storefront.hpp"
#include "storebench/url.hpp"
#include "support.hpp"

// Independent oracles shared by the unit tests and the acceptance binary.
namespace storebench::testing {

struct Card {
    std::string handle;
    std::int64_t price_min_cents = 0;
    bool available = false;
};

/// Product cards as rendered, read back from the markup hooks.
inline std::vector<Card> cards_in(const std::string& html) {
    const HtmlNode doc = parse_html(html, HtmlMode::lenient);
    std::vector<Card> out;
    for (const HtmlNode* li : find_elements(doc, [](const HtmlNode& n) { return n.has_attr("data-sg-card"); })) {
        Card c;
        c.handle = li->attr_or("data-sg-product");
        c.available = li->attr_or("data-sg-available") == "true";
        const auto prices = find_elements(*li, [](const HtmlNode& n) { return n.has_attr("data-sg-price"); });
        if (prices.size() != 1) throw std::runtime_error("card " + c.handle + " has no single price element");
        const std::string text = prices.front()->text_content();
        c.price_min_cents = Money::parse(text.substr(0, text.find(' '))).cents();
        out.push_back(c);
    }
    return out;
}

inline std::set<std::string> handles_of(const std::vector<Card>& cards) {
    std::set<std::string> out;
    for (const auto& c : cards) out.insert(c.handle);
    return out;
}

/// Every product matching the listing, both load-more stages combined.
inline std::vector<Card> full_listing(Storefront& sf, const std::string& collection, QueryParams params) {
    params.emplace_back("loaded", "24");
    const Response r = get(sf, "/collections/" + collection + "?" + build_query(params));
    if (r.status != 200) throw std::runtime_error("listing " + collection + " answered " + std::to_string(r.status));
    return cards_in(r.body);
}

inline std::size_t active_count(const ShopBundle& b, const Collection& c) {
    std::size_t n = 0;
    for (const auto& h : c.product_handles) n += b.find_product(h)->is_active() ? 1 : 0;
    return n;
}

/// Brand and Type compare against vendor and product type; other dimensions against variant options.
inline bool realizes(const Product& p, const Facet& facet) {
    const std::string dim = to_lower(facet.dimension);
    const std::string val = to_lower(facet.value);
    if (dim == "brand") return to_lower(p.vendor) == val;
    if (dim == "type") return to_lower(p.product_type) == val;
    for (const auto& v : p.variants) {
        for (const auto& [d, value] : v.options) {
            if (to_lower(d) == dim && to_lower(value) == val) return true;
        }
    }
    return false;
}

/// Independent predicate for one listing constraint set.
inline bool listing_matches(const Product& p, bool available, bool on_sale, const std::optional<Facet>& facet) {
    if (!p.is_active()) return false;
    if (available && std::none_of(p.variants.begin(), p.variants.end(), [](const Variant& v) { return v.available; })) {
        return false;
    }
    if (on_sale && std::none_of(p.variants.begin(), p.variants.end(), [](const Variant& v) {
            return v.compare_at_price && *v.compare_at_price > v.price;
        })) {
        return false;
    }
    return !facet || realizes(p, *facet);
}

/// Products in the collection realizing the facet, counted without the option index.
inline int facet_matches(const ShopBundle& bundle, const std::string& collection, const Facet& facet) {
    const Collection* c = bundle.find_collection(collection);
    if (!c) return 0;
    int n = 0;
    for (const auto& handle : c->product_handles) {
        const Product* p = bundle.find_product(handle);
        if (p && realizes(*p, facet)) ++n;
    }
    return n;
}

/// Base routes a crawl of a fixture storefront must reach, built from the catalog alone.
inline std::set<std::string> expected_routes(const ShopBundle& bundle) {
    std::set<std::string> out{"/", "/search", "/cart"};
    for (const auto& c : bundle.collections()) {
        out.insert("/collections/" + c.handle);
        for (const auto& h : c.product_handles) {
            if (bundle.find_product(h)->is_active()) out.insert("/products/" + h);
        }
    }
    for (const auto& p : bundle.pages()) out.insert(p.route());
    return out;
}

/// Five linked pages, one navigation surface on the home page, one broken link and one external link.
inline std::map<std::string, std::string> five_page_site() {
    return {
        {"/", R"(<html><body><nav data-sg-surface="navigation"><a href="/a">A</a><a href="/b">B</a></nav>
                 <main><a href="/c">C</a></main></body></html>)"},
        {"/a", R"(<html><body><a href="/">Home</a><a href="b">B</a></body></html>)"},
        {"/b", R"(<html><body><a href="/b">Self</a><a href="https://elsewhere.test/x">Out</a><a href="/d?x=1">D</a></body></html>)"},
        {"/c", R"(<html><body><a href="/a#top">A</a></body></html>)"},
        {"/d", R"(<html><body><a href="/missing">Gone</a></body></html>)"},
    };
}

}  // namespace storebench::testing
