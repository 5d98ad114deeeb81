#include "storebench/storefront.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "storebench/html.hpp"
#include "storebench/url.hpp"

namespace storebench {

using nlohmann::json;

namespace {

std::string e(std::string_view text) { return escape_html(text); }

std::string store_name(const ShopBundle& bundle) {
    const auto& name = bundle.capabilities().shop.name;
    return name ? *name : bundle.shop_slug();
}

std::string humanize(std::string_view identifier) {
    std::string out(identifier);
    std::replace(out.begin(), out.end(), '_', ' ');
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

bool contains_word(std::string_view haystack, std::string_view needle) { return haystack.find(needle) != std::string_view::npos; }

std::vector<const Product*> listed(const std::vector<const Product*>& products) {
    std::vector<const Product*> out;
    for (const Product* p : products) {
        if (p->is_active()) out.push_back(p);
    }
    return out;
}

std::vector<const Product*> active_products(const ShopBundle& bundle) {
    std::vector<const Product*> out;
    for (const auto& p : bundle.products()) {
        if (p.is_active()) out.push_back(&p);
    }
    return out;
}

std::string price_html(const Product& p) {
    std::string out = "<span data-sg-price>" + e(p.price_min.to_string());
    if (p.price_max != p.price_min) out += " - " + e(p.price_max.to_string());
    out += "</span>";
    std::optional<Money> compare_at;
    for (const auto& v : p.variants) {
        if (v.on_sale() && (!compare_at || *v.compare_at_price > *compare_at)) compare_at = v.compare_at_price;
    }
    if (compare_at) out += " <s data-sg-compare-at>" + e(compare_at->to_string()) + "</s>";
    return out;
}

std::string card_html(const Product& p) {
    std::string out = "<li data-sg-card data-sg-product=\"" + e(p.handle) + "\" data-sg-available=\"" +
                      (p.any_available() ? "true" : "false") + "\">";
    out += "<a href=\"/products/" + e(p.handle) + "\">" + e(p.title) + "</a>";
    if (!p.vendor.empty()) out += " <span data-sg-vendor>" + e(p.vendor) + "</span>";
    out += " " + price_html(p);
    if (!p.any_available()) out += " <span data-sg-sold-out>Sold out</span>";
    out += "</li>\n";
    return out;
}

std::string cards_html(const std::vector<const Product*>& products) {
    std::string out;
    for (const Product* p : products) out += card_html(*p);
    return out;
}

std::string body_html(std::string_view body) {
    std::string out;
    std::size_t i = 0;
    while (i <= body.size()) {
        auto end = body.find("\n\n", i);
        if (end == std::string_view::npos) end = body.size();
        const auto para = body.substr(i, end - i);
        if (!para.empty()) out += "<p>" + e(para) + "</p>\n";
        i = end + 2;
    }
    return out;
}

std::string hidden_input(std::string_view name, std::string_view value) {
    return "<input type=\"hidden\" name=\"" + e(name) + "\" value=\"" + e(value) + "\">";
}

std::string summary_rows(const CartState& cart) {
    std::string out = "<dl data-sg-cart-summary>";
    out += "<dt>Original price</dt><dd data-sg-list-total>" + e((cart.subtotal + cart.savings).to_string()) + "</dd>";
    out += "<dt>Savings</dt><dd data-sg-savings>" + e(cart.savings.to_string()) + "</dd>";
    out += "<dt>Subtotal</dt><dd data-sg-subtotal>" + e(cart.subtotal.to_string()) + "</dd>";
    out += "</dl>\n";
    return out;
}

std::string cart_lines_html(const CartState& cart) {
    std::string out = "<ul data-sg-cart-lines>\n";
    for (const auto& line : cart.lines) {
        out += "<li data-sg-line=\"" + e(line.variant_id) + "\">";
        out += "<a href=\"/products/" + e(line.product_handle) + "\">" + e(line.title) + "</a> ";
        out += "<span data-sg-unit-price>" + e(line.unit_price.to_string()) + "</span> ";
        out += "<form action=\"/cart/update\" method=\"post\" data-sg-qty-form>" + hidden_input("id", line.variant_id) +
               hidden_input("return_to", "/cart") +
               "<label>Quantity <input type=\"number\" name=\"quantity\" min=\"0\" value=\"" +
               std::to_string(line.quantity) + "\" data-sg-qty-input></label><button type=\"submit\">Update</button></form> ";
        out += "<form action=\"/cart/remove\" method=\"post\" data-sg-remove-form>" + hidden_input("id", line.variant_id) +
               hidden_input("return_to", "/cart") + "<button type=\"submit\" data-sg-remove>Remove</button></form> ";
        out += "<span data-sg-line-total>" + e(line.line_total().to_string()) + "</span>";
        out += "</li>\n";
    }
    out += "</ul>\n";
    return out;
}

std::string continue_href(const ShopBundle& bundle) {
    return bundle.collections().empty() ? "/" : "/collections/" + bundle.collections().front().handle;
}

std::string drawer_html(const ShopBundle& bundle, const CartState& cart) {
    std::string out = "<div data-sg-drawer>\n<h2>Your cart</h2>\n";
    if (cart.lines.empty()) {
        out += "<p data-sg-cart-empty>Your cart is empty.</p>\n";
        out += "<a href=\"" + e(continue_href(bundle)) + "\" data-sg-continue>Continue shopping</a>\n";
    } else {
        out += cart_lines_html(cart);
        out += summary_rows(cart);
    }
    out += "<a href=\"/cart\" data-sg-view-cart>View cart</a>\n</div>";
    return out;
}

std::vector<std::string> suggested_queries(const ShopBundle& bundle) {
    std::vector<std::string> out;
    for (const Product* p : active_products(bundle)) {
        if (p->product_type.empty()) continue;
        if (std::find(out.begin(), out.end(), p->product_type) != out.end()) continue;
        out.push_back(p->product_type);
        if (out.size() == 3) break;
    }
    return out;
}

bool has_predictive_type(const Capabilities& caps, std::string_view type) {
    return caps.search.has_predictive &&
           std::find(caps.search.predictive_types.begin(), caps.search.predictive_types.end(), type) !=
               caps.search.predictive_types.end();
}

std::string header_html(const ShopBundle& bundle, const CartState& cart) {
    const auto& caps = bundle.capabilities();
    std::string out;
    if (caps.site_shell.has_announcement_bar) {
        out += "<div data-sg-announcement>Welcome to " + e(store_name(bundle)) + ".</div>\n";
    }
    out += "<header data-sg-header data-sg-header-style=\"" + e(caps.site_shell.header_style) + "\">\n";
    out += "<a href=\"/\" data-sg-logo>" + e(store_name(bundle)) + "</a>\n";

    out += "<button type=\"button\" data-sg-toggle=\"navigation\" aria-expanded=\"false\">Menu</button>\n";
    out += "<nav data-sg-surface=\"navigation\" hidden>\n<ul>\n";
    for (const auto& c : bundle.collections()) {
        out += "<li><a href=\"/collections/" + e(c.handle) + "\">" + e(c.title) + "</a></li>\n";
    }
    out += "</ul>\n</nav>\n";

    out += "<button type=\"button\" data-sg-toggle=\"search\" aria-expanded=\"false\">Search</button>\n";
    out += "<div data-sg-surface=\"search\" hidden>\n";
    out += "<form action=\"/search\" method=\"get\" role=\"search\" data-sg-search-form>"
           "<input type=\"search\" name=\"q\" placeholder=\"Search\" aria-label=\"Search\" data-sg-search-input>"
           "<button type=\"submit\">Search</button></form>\n";
    if (caps.search.has_predictive) out += "<div data-sg-suggest-results></div>\n";
    if (has_predictive_type(caps, "suggested_queries")) {
        out += "<ul data-sg-suggested-queries>\n";
        for (const auto& q : suggested_queries(bundle)) {
            out += "<li><a href=\"/search?q=" + e(url_encode(q)) + "\">" + e(q) + "</a></li>\n";
        }
        out += "</ul>\n";
    }
    if (has_predictive_type(caps, "collection_shortcuts") && !bundle.collections().empty()) {
        out += "<ul data-sg-collection-shortcuts>\n";
        const auto& c = bundle.collections().front();
        out += "<li><a href=\"/collections/" + e(c.handle) + "\">" + e(c.title) + "</a></li>\n";
        out += "</ul>\n";
    }
    out += "</div>\n";

    out += "<a href=\"/cart\" data-sg-cart-link>Cart (<span data-sg-cart-count>" + std::to_string(cart.item_count()) +
           "</span>)</a>\n";
    if (caps.cart.type == "drawer") {
        out += "<button type=\"button\" data-sg-toggle=\"cart_drawer\" aria-expanded=\"false\">Open cart</button>\n";
        out += "<aside data-sg-surface=\"cart_drawer\" hidden>\n" + drawer_html(bundle, cart) + "\n</aside>\n";
    }
    out += "</header>\n";
    return out;
}

std::string footer_html(const ShopBundle& bundle) {
    const int groups = std::clamp(bundle.capabilities().site_shell.footer_groups, 0, 3);
    std::string out = "<footer data-sg-footer>\n";
    if (groups >= 1) {
        out += "<section data-sg-footer-group=\"shop\"><h2>Shop</h2><ul>\n";
        for (const auto& c : bundle.collections()) {
            out += "<li><a href=\"/collections/" + e(c.handle) + "\">" + e(c.title) + "</a></li>\n";
        }
        out += "</ul></section>\n";
    }
    if (groups >= 2) {
        out += "<section data-sg-footer-group=\"help\"><h2>Help</h2><ul>\n";
        for (const auto& page : bundle.pages()) {
            out += "<li><a href=\"" + e(page.route()) + "\">" + e(page.title) + "</a></li>\n";
        }
        out += "</ul></section>\n";
    }
    if (groups >= 3) {
        out += "<section data-sg-footer-group=\"media\"><h2>Follow us</h2><p>Stories from " + e(store_name(bundle)) +
               ".</p></section>\n";
    }
    out += "</footer>\n";
    return out;
}

std::string layout(const ShopBundle& bundle, const CartState& cart, std::string_view title, std::string_view main) {
    std::string out = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>";
    out += e(title) + " | " + e(store_name(bundle));
    out += "</title>\n</head>\n<body data-sg-shop=\"" + e(bundle.shop_slug()) + "\">\n";
    out += header_html(bundle, cart);
    out += "<main id=\"main\">\n";
    out += main;
    out += "</main>\n";
    out += footer_html(bundle);
    out += "</body>\n</html>\n";
    return out;
}

Response html_response(int status, std::string body) {
    Response r;
    r.status = status;
    r.body = std::move(body);
    return r;
}

Response json_response(int status, const json& body) {
    Response r;
    r.status = status;
    r.content_type = "application/json";
    r.body = body.dump();
    return r;
}

Response not_found(const ShopBundle& bundle, const CartState& cart) {
    return html_response(404, layout(bundle, cart, "Not found",
                                     "<h1>Page not found</h1>\n<p><a href=\"/\">Return to the homepage</a></p>\n"));
}

Response bad_request(const ShopBundle& bundle, const CartState& cart, const std::string& detail) {
    return html_response(400, layout(bundle, cart, "Bad request", "<h1>Bad request</h1>\n<p>" + e(detail) + "</p>\n"));
}

// ---------------------------------------------------------------------------
// Page bodies

std::string home_main(const ShopBundle& bundle) {
    const auto& caps = bundle.capabilities();
    const auto products = active_products(bundle);
    std::string out = "<h1>" + e(store_name(bundle)) + "</h1>\n";
    if (!caps.shop.descriptor.empty()) out += "<p>" + e(caps.shop.descriptor) + "</p>\n";
    for (const auto& type : caps.homepage.section_types) {
        out += "<section data-sg-section data-section-type=\"" + e(type) + "\">\n<h2>" + e(humanize(type)) + "</h2>\n";
        if (contains_word(type, "newsletter")) {
            out += "<form action=\"/\" method=\"get\" data-sg-newsletter><label>Email "
                   "<input type=\"email\" name=\"email\"></label><button type=\"submit\">Subscribe</button></form>\n";
        } else if (contains_word(type, "product")) {
            std::vector<const Product*> picks(products.begin(),
                                              products.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(4, products.size())));
            out += "<ul data-sg-grid>\n" + cards_html(picks) + "</ul>\n";
        } else if (contains_word(type, "category") || contains_word(type, "collection")) {
            out += "<ul>\n";
            std::size_t n = 0;
            for (const auto& c : bundle.collections()) {
                if (n++ == 7) break;
                out += "<li><a href=\"/collections/" + e(c.handle) + "\">" + e(c.title) + "</a></li>\n";
            }
            out += "</ul>\n";
        } else {
            out += "<p>" + e(humanize(type)) + " content.</p>\n";
        }
        out += "</section>\n";
    }
    return out;
}

struct CollectionRequest {
    ListingQuery query;
    bool grid_only = false;
};

/// Parses listing parameters; throws std::invalid_argument with a message for 400s.
CollectionRequest parse_listing(const QueryParams& params, const Capabilities& caps) {
    CollectionRequest req;
    const auto declared = caps.sort_keys();
    for (const auto& [key, value] : params) {
        if (key == "available") {
            req.query.available = value == "1" || value == "true";
        } else if (key == "on_sale") {
            req.query.on_sale = value == "1" || value == "true";
        } else if (key == "sort_by") {
            const auto sort = parse_sort_key(value);
            if (!sort || std::find(declared.begin(), declared.end(), *sort) == declared.end()) {
                throw std::invalid_argument("unsupported sort_by '" + value + "'");
            }
            req.query.sort = *sort;
        } else if (key == "loaded") {
            if (value == "0") {
                req.query.loaded = 0;
            } else if (value == std::to_string(kListingPageSize)) {
                req.query.loaded = kListingPageSize;
            } else {
                throw std::invalid_argument("loaded must be 0 or " + std::to_string(kListingPageSize));
            }
        } else if (key == "section") {
            req.grid_only = value == "grid";
        } else if (key.rfind("filter.", 0) == 0 && !req.query.facet && !value.empty()) {
            req.query.facet = Facet{key.substr(7), value};
        }
    }
    return req;
}

QueryParams listing_params(const ListingQuery& q) {
    QueryParams params;
    if (q.available) params.emplace_back("available", "1");
    if (q.on_sale) params.emplace_back("on_sale", "1");
    if (q.facet) params.emplace_back("filter." + q.facet->dimension, q.facet->value);
    if (q.sort != SortKey::featured) params.emplace_back("sort_by", std::string(sort_key_name(q.sort)));
    return params;
}

std::string collection_main(const ShopBundle& bundle, const Collection& c, const ListingQuery& q,
                            const std::vector<const Product*>& ordered, const PageSlice& slice) {
    const auto& caps = bundle.capabilities();
    const std::string base = "/collections/" + c.handle;
    std::string out = "<h1>" + e(c.title) + "</h1>\n";
    if (!c.description.empty()) out += "<p>" + e(c.description) + "</p>\n";

    const auto& index = bundle.option_index(c.handle);
    const bool show_checks = caps.has_filter("availability") || caps.has_filter("on_sale");
    if (show_checks || !index.empty()) {
        out += "<button type=\"button\" data-sg-toggle=\"filter_panel\" aria-expanded=\"false\">Filter</button>\n";
        out += "<div data-sg-surface=\"filter_panel\" hidden>\n";
        if (show_checks) {
            out += "<form action=\"" + e(base) + "\" method=\"get\" data-sg-filter-form>\n";
            if (caps.has_filter("availability")) {
                out += std::string("<label><input type=\"checkbox\" name=\"available\" value=\"1\" data-sg-filter=\"available\"") +
                       (q.available ? " checked" : "") + "> In stock</label>\n";
            }
            if (caps.has_filter("on_sale")) {
                out += std::string("<label><input type=\"checkbox\" name=\"on_sale\" value=\"1\" data-sg-filter=\"on_sale\"") +
                       (q.on_sale ? " checked" : "") + "> On sale</label>\n";
            }
            if (q.facet) out += hidden_input("filter." + q.facet->dimension, q.facet->value);
            if (q.sort != SortKey::featured) out += hidden_input("sort_by", sort_key_name(q.sort));
            out += "<button type=\"submit\">Apply</button>\n</form>\n";
        }
        if (!index.empty()) {
            out += "<ul data-sg-facets>\n";
            for (const auto& [dim, values] : index) {
                out += "<li>" + e(dim) + "\n<ul>\n";
                for (const auto& [value, count] : values) {
                    out += "<li><a href=\"" + e(base + "?" + build_query({{"filter." + dim, value}})) +
                           "\" data-sg-facet-dim=\"" + e(dim) + "\" data-sg-facet-value=\"" + e(value) + "\">" + e(value) +
                           " (" + std::to_string(count) + ")</a></li>\n";
                }
                out += "</ul>\n</li>\n";
            }
            out += "</ul>\n";
        }
        if (q.facet || q.available || q.on_sale) {
            out += "<a href=\"" + e(base) + "\" data-sg-clear-filters>Clear filters</a>\n";
        }
        out += "</div>\n";
    }

    const auto sorts = caps.sort_keys();
    if (!sorts.empty()) {
        out += "<button type=\"button\" data-sg-toggle=\"sort\" aria-expanded=\"false\">Sort</button>\n";
        out += "<div data-sg-surface=\"sort\" hidden>\n<form action=\"" + e(base) + "\" method=\"get\" data-sg-sort-form>\n";
        out += "<label>Sort by <select name=\"sort_by\" data-sg-sort-select>\n";
        for (SortKey key : sorts) {
            out += "<option value=\"" + e(sort_key_name(key)) + "\"" + (key == q.sort ? " selected" : "") + ">" +
                   e(sort_key_label(key)) + "</option>\n";
        }
        out += "</select></label>\n";
        if (q.available) out += hidden_input("available", "1");
        if (q.on_sale) out += hidden_input("on_sale", "1");
        if (q.facet) out += hidden_input("filter." + q.facet->dimension, q.facet->value);
        out += "<button type=\"submit\">Sort</button>\n</form>\n</div>\n";
    }

    out += "<p data-sg-result-count>" + std::to_string(ordered.size()) + " products</p>\n";
    if (ordered.empty()) {
        out += "<p data-sg-empty>No products match these filters.</p>\n";
    } else {
        out += "<ul data-sg-grid>\n";
        if (q.loaded > 0) {
            out += cards_html(paginate(ordered, 0).items);
        }
        out += cards_html(slice.items);
        out += "</ul>\n";
    }
    if (slice.has_more) {
        auto params = listing_params(q);
        params.emplace_back("loaded", std::to_string(kListingPageSize));
        out += "<a href=\"" + e(base + "?" + build_query(params)) + "\" data-sg-load-more>Load more</a>\n";
    }
    return out;
}

std::vector<const Product*> recommendations(const ShopBundle& bundle, const Product& product) {
    std::vector<const Product*> out;
    for (const Collection* c : bundle.collections_containing(product.handle)) {
        for (const Product* p : bundle.collection_products(*c)) {
            if (p == &product || !p->is_active()) continue;
            if (std::find(out.begin(), out.end(), p) != out.end()) continue;
            out.push_back(p);
            if (out.size() == 4) return out;
        }
    }
    return out;
}

std::string variant_label(const Variant& v) {
    std::string label;
    for (std::size_t i = 0; i < v.options.size(); ++i) {
        if (i > 0) label += " / ";
        label += v.options[i].second;
    }
    return label;
}

std::string product_main(const ShopBundle& bundle, const Product& p) {
    const auto& caps = bundle.capabilities();
    std::string out = "<article data-sg-product-page=\"" + e(p.handle) + "\">\n<h1>" + e(p.title) + "</h1>\n";
    if (!p.vendor.empty()) out += "<p data-sg-vendor>" + e(p.vendor) + "</p>\n";
    if (!p.product_type.empty()) out += "<p data-sg-type>" + e(p.product_type) + "</p>\n";
    if (!p.images.empty()) {
        out += "<div data-sg-gallery data-sg-gallery-style=\"" + e(caps.product.gallery_style) + "\">\n";
        for (const auto& src : p.images) out += "<img src=\"" + e(src) + "\" alt=\"" + e(p.title) + "\">\n";
        out += "</div>\n";
    }
    out += "<p>" + price_html(p) + "</p>\n";

    const Variant* first_available = nullptr;
    for (const auto& v : p.variants) {
        if (v.available) {
            first_available = &v;
            break;
        }
    }
    if (!p.is_active()) {
        out += "<p data-sg-unavailable>This product is not currently for sale.</p>\n";
    } else if (!first_available) {
        out += "<p data-sg-sold-out>Sold out</p>\n";
    } else {
        out += "<form action=\"/cart/add\" method=\"post\" data-sg-add-form>\n";
        if (!p.option_axes.empty()) {
            out += "<fieldset data-sg-variant-picker>\n<legend>";
            for (std::size_t i = 0; i < p.option_axes.size(); ++i) {
                if (i > 0) out += " / ";
                out += e(p.option_axes[i]);
            }
            out += "</legend>\n";
            for (const auto& v : p.variants) {
                out += "<label><input type=\"radio\" name=\"id\" value=\"" + e(v.id) + "\" data-sg-variant";
                if (&v == first_available) out += " checked";
                if (!v.available) out += " disabled";
                out += "> " + e(variant_label(v)) + " - " + e(v.price.to_string());
                if (!v.available) out += " (sold out)";
                out += "</label>\n";
            }
            out += "</fieldset>\n";
        } else {
            out += hidden_input("id", first_available->id) + "\n";
        }
        if (caps.product.has_quantity_selector) {
            out += "<label>Quantity <input type=\"number\" name=\"quantity\" value=\"1\" min=\"1\" data-sg-qty></label>\n";
        } else {
            out += hidden_input("quantity", "1") + "\n";
        }
        out += hidden_input("return_to", "/cart") + "\n";
        out += "<button type=\"submit\" data-sg-add>Add to cart</button>\n</form>\n";
    }
    if (!p.description.empty()) out += "<div data-sg-description>\n" + body_html(p.description) + "</div>\n";
    if (caps.product.has_reviews) {
        out += "<section data-sg-reviews>\n<h2>Reviews</h2>\n";
        if (p.reviews.empty()) {
            out += "<p>No reviews yet.</p>\n";
        } else {
            for (const auto& r : p.reviews) {
                out += "<blockquote data-sg-review data-sg-rating=\"" + std::to_string(r.rating) + "\"><p><b>" +
                       e(r.title) + "</b> " + std::to_string(r.rating) + "/5</p><p>" + e(r.body) + "</p><p>" +
                       e(r.author) + "</p></blockquote>\n";
            }
        }
        out += "</section>\n";
    }
    if (caps.product.has_recommendations) {
        const auto recs = recommendations(bundle, p);
        if (!recs.empty()) {
            out += "<section data-sg-recommendations>\n<h2>Customers also love</h2>\n<ul>\n" + cards_html(recs) +
                   "</ul>\n</section>\n";
        }
    }
    out += "</article>\n";
    return out;
}

std::string page_main(const PageDoc& page) {
    return "<article data-sg-page=\"" + e(page.handle) + "\">\n<h1>" + e(page.title) + "</h1>\n" + body_html(page.body) +
           "</article>\n";
}

std::string search_main(const ShopBundle& bundle, const std::string& q) {
    const auto results = search_products(bundle, q);
    std::string out = "<h1>Search</h1>\n";
    out += "<form action=\"/search\" method=\"get\" role=\"search\"><input type=\"search\" name=\"q\" value=\"" + e(q) +
           "\" aria-label=\"Search\"><button type=\"submit\">Search</button></form>\n";
    if (q.empty()) {
        out += "<p data-sg-result-count>0 results</p>\n";
        return out;
    }
    out += "<p data-sg-result-count>" + std::to_string(results.size()) + " results for \"" + e(q) + "\"</p>\n";
    if (results.empty()) {
        out += "<p data-sg-empty>No products match your search.</p>\n";
    } else {
        out += "<ul data-sg-grid>\n" + cards_html(results) + "</ul>\n";
    }
    return out;
}

std::string cart_main(const ShopBundle& bundle, const CartState& cart) {
    std::string out = "<h1>Your cart</h1>\n";
    if (cart.lines.empty()) {
        out += "<p data-sg-cart-empty>Your cart is empty.</p>\n<a href=\"" + e(continue_href(bundle)) +
               "\" data-sg-continue>Continue shopping</a>\n";
        return out;
    }
    out += cart_lines_html(cart);
    out += summary_rows(cart);
    out += "<form action=\"/checkout\" method=\"get\"><button type=\"submit\" data-sg-checkout>Checkout</button></form>\n";
    return out;
}

std::string strip_trailing_slash(std::string path) {
    while (path.size() > 1 && path.back() == '/') path.pop_back();
    return path;
}

bool valid_token(std::string_view token) {
    if (token.empty() || token.size() > 64) return false;
    return std::all_of(token.begin(), token.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; });
}

}  // namespace

const std::string* Response::header(std::string_view name) const {
    for (const auto& [key, value] : headers) {
        if (iequals(key, name)) return &value;
    }
    return nullptr;
}

Storefront::Storefront(ShopBundle bundle, StorefrontOptions options)
    : bundle_(std::move(bundle)), options_(options), token_rng_(options.seed) {}

std::string Storefront::mint_token() {
    std::lock_guard lock(token_mutex_);
    std::ostringstream out;
    out << std::hex << token_rng_() << "-" << ++token_counter_;
    return out.str();
}

std::shared_ptr<Storefront::Session> Storefront::find_session(const std::string& id) const {
    if (id.empty()) return nullptr;
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::pair<std::shared_ptr<Storefront::Session>, std::string> Storefront::session_for(const std::string& id) {
    if (auto existing = find_session(id)) return {existing, {}};
    const std::string token = valid_token(id) ? id : mint_token();
    std::unique_lock lock(sessions_mutex_);
    auto& slot = sessions_[token];
    if (!slot) {
        slot = std::make_shared<Session>();
        slot->cart.session_id = token;
    }
    return {slot, token == id ? std::string{} : token};
}

CartState Storefront::cart(const std::string& session) const {
    auto s = find_session(session);
    if (!s) {
        CartState empty;
        empty.session_id = session;
        return empty;
    }
    std::lock_guard lock(s->mutex);
    return s->cart;
}

void Storefront::reset_all() {
    {
        std::unique_lock lock(sessions_mutex_);
        sessions_.clear();
    }
    std::lock_guard lock(token_mutex_);
    token_rng_.seed(options_.seed);
    token_counter_ = 0;
}

void Storefront::reset_session(const std::string& session) {
    auto s = find_session(session);
    if (!s) return;
    std::lock_guard lock(s->mutex);
    s->cart.lines.clear();
    recompute_totals(s->cart);
}

Response Storefront::handle(const Request& request) {
    const auto target = split_target(request.target);
    const std::string path = strip_trailing_slash(target.path.empty() ? "/" : target.path);
    if (request.method == "GET" || request.method == "HEAD") return route_get(request, path, target.query);
    if (request.method == "POST") return route_post(request, path, target.query);
    Response r = json_response(405, json{{"error", "method not allowed"}});
    r.headers.emplace_back("Allow", "GET, POST");
    return r;
}

Response Storefront::route_get(const Request& request, const std::string& path, const std::string& query) {
    const CartState current = cart(request.session);
    const auto params = parse_query(query);

    if (path == "/") return html_response(200, layout(bundle_, current, "Home", home_main(bundle_)));

    if (path == "/cart") return html_response(200, layout(bundle_, current, "Cart", cart_main(bundle_, current)));
    if (path == "/cart.js") return json_response(200, json(current));
    if (path == "/checkout") {
        return html_response(200, layout(bundle_, current, "Checkout",
                                         "<h1>Checkout is disabled</h1>\n<p>This store does not take orders.</p>\n"
                                         "<a href=\"/cart\">Return to cart</a>\n"));
    }
    if (path == "/search") {
        const std::string q = query_value(params, "q").value_or("");
        return html_response(200, layout(bundle_, current, "Search", search_main(bundle_, q)));
    }
    if (path == "/search/suggest.json") {
        return json_response(200, suggest_json(bundle_, query_value(params, "q").value_or("")));
    }

    auto tail = [&](std::string_view prefix) -> std::optional<std::string> {
        if (path.rfind(prefix, 0) != 0) return std::nullopt;
        std::string rest = url_decode(path.substr(prefix.size()));
        if (rest.empty() || rest.find('/') != std::string::npos) return std::nullopt;
        return to_lower(rest);
    };

    if (auto handle = tail("/collections/")) {
        const Collection* c = bundle_.find_collection(*handle);
        if (!c) return not_found(bundle_, current);
        CollectionRequest req;
        try {
            req = parse_listing(params, bundle_.capabilities());
        } catch (const std::invalid_argument& err) {
            return bad_request(bundle_, current, err.what());
        }
        const auto ordered = apply_sort(apply_filters(listed(bundle_.collection_products(*c)), req.query), req.query.sort);
        const auto slice = paginate(ordered, req.query.loaded);
        if (req.grid_only) return html_response(200, "<ul data-sg-grid-append>\n" + cards_html(slice.items) + "</ul>\n");
        return html_response(200, layout(bundle_, current, c->title, collection_main(bundle_, *c, req.query, ordered, slice)));
    }
    if (auto handle = tail("/products/")) {
        const Product* p = bundle_.find_product(*handle);
        if (!p) return not_found(bundle_, current);
        return html_response(200, layout(bundle_, current, p->title, product_main(bundle_, *p)));
    }
    if (auto handle = tail("/pages/")) {
        const PageDoc* page = bundle_.find_page(PageKind::custom_page, *handle);
        if (!page) return not_found(bundle_, current);
        return html_response(200, layout(bundle_, current, page->title, page_main(*page)));
    }
    if (auto handle = tail("/policies/")) {
        const PageDoc* page = bundle_.find_page(PageKind::native_policy, *handle);
        if (!page) return not_found(bundle_, current);
        return html_response(200, layout(bundle_, current, page->title, page_main(*page)));
    }
    if (path == "/cart/add" || path == "/cart/update" || path == "/cart/remove" || path == "/__reset") {
        Response r = json_response(405, json{{"error", "use POST"}});
        r.headers.emplace_back("Allow", "POST");
        return r;
    }
    return not_found(bundle_, current);
}

Response Storefront::route_post(const Request& request, const std::string& path, const std::string& query) {
    if (path == "/cart/add") return cart_mutation(request, "add");
    if (path == "/cart/update") return cart_mutation(request, "update");
    if (path == "/cart/remove") return cart_mutation(request, "remove");
    if (path == "/__reset") {
        const std::string scope = query_value(parse_query(query), "scope").value_or("all");
        if (scope == "all") {
            reset_all();
        } else if (scope == "session") {
            reset_session(request.session);
        } else {
            return json_response(400, json{{"error", "scope must be 'session' or 'all'"}});
        }
        return json_response(200, json{{"ok", true}, {"scope", scope}});
    }
    return json_response(404, json{{"error", "no such endpoint"}});
}

Response Storefront::cart_mutation(const Request& request, const std::string& action) {
    std::string id;
    std::string quantity_text;
    std::string return_to;
    if (request.content_type.find("application/json") != std::string::npos) {
        json body;
        try {
            body = json::parse(request.body);
        } catch (const json::parse_error&) {
            return json_response(400, json{{"error", "body is not valid JSON"}});
        }
        if (!body.is_object()) return json_response(400, json{{"error", "body must be a JSON object"}});
        if (body.contains("id")) id = body["id"].is_string() ? body["id"].get<std::string>() : body["id"].dump();
        if (body.contains("quantity")) {
            quantity_text = body["quantity"].is_string() ? body["quantity"].get<std::string>() : body["quantity"].dump();
        }
        if (body.contains("return_to") && body["return_to"].is_string()) return_to = body["return_to"];
    } else {
        const auto form = parse_query(request.body);
        id = query_value(form, "id").value_or("");
        quantity_text = query_value(form, "quantity").value_or("");
        return_to = query_value(form, "return_to").value_or("");
    }
    if (!return_to.empty() && (return_to.front() != '/' || return_to.rfind("//", 0) == 0)) return_to.clear();

    auto fail = [&](int status, const std::string& message) {
        if (!return_to.empty()) {
            const CartState current = cart(request.session);
            return html_response(status, layout(bundle_, current, "Cart error",
                                                "<h1>Could not update cart</h1>\n<p>" + e(message) +
                                                    "</p>\n<a href=\"/cart\">Return to cart</a>\n"));
        }
        return json_response(status, json{{"error", message}, {"status", status}});
    };

    if (id.empty()) return fail(400, "missing variant id");
    std::int64_t quantity = action == "add" ? 1 : 0;
    if (!quantity_text.empty()) {
        try {
            std::size_t used = 0;
            quantity = std::stoll(quantity_text, &used);
            if (used != quantity_text.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            return fail(400, "quantity must be an integer");
        }
    } else if (action == "update") {
        return fail(400, "missing quantity");
    }

    auto [session, new_token] = session_for(request.session);
    CartState snapshot;
    try {
        std::lock_guard lock(session->mutex);
        if (action == "add") {
            cart_add(session->cart, bundle_, id, quantity);
        } else if (action == "update") {
            cart_set_quantity(session->cart, bundle_, id, quantity);
        } else {
            cart_remove(session->cart, id);
        }
        snapshot = session->cart;
    } catch (const CartError& err) {
        Response r = fail(err.status(), err.what());
        if (!new_token.empty()) {
            r.headers.emplace_back("Set-Cookie", std::string(kSessionCookie) + "=" + new_token + "; Path=/; HttpOnly; SameSite=Lax");
        }
        return r;
    }

    Response r;
    if (!return_to.empty()) {
        r.status = 303;
        r.headers.emplace_back("Location", return_to);
        r.body = "<!DOCTYPE html>\n<html><body><a href=\"" + e(return_to) + "\">Continue</a></body></html>\n";
    } else {
        json body = snapshot;
        body["drawer_html"] = drawer_html(bundle_, snapshot);
        r = json_response(200, body);
    }
    if (!new_token.empty()) {
        r.headers.emplace_back("Set-Cookie", std::string(kSessionCookie) + "=" + new_token + "; Path=/; HttpOnly; SameSite=Lax");
    }
    return r;
}

}  // namespace storebench
