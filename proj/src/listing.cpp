#include <algorithm>

#include "storebench/storefront.hpp"

namespace storebench {

using nlohmann::json;

std::vector<const Product*> apply_filters(const std::vector<const Product*>& products, const ListingQuery& query) {
    std::vector<const Product*> out;
    for (const Product* p : products) {
        if (query.available && !p->any_available()) continue;
        if (query.on_sale && !p->any_on_sale()) continue;
        if (query.facet && !product_realizes(*p, query.facet->dimension, query.facet->value)) continue;
        out.push_back(p);
    }
    return out;
}

std::vector<const Product*> apply_sort(const std::vector<const Product*>& products, SortKey key) {
    std::vector<const Product*> out = products;
    switch (key) {
        case SortKey::featured:
            break;
        case SortKey::best_selling:
            // Ranked products first by rank; unranked keep collection order after them.
            std::stable_sort(out.begin(), out.end(), [](const Product* a, const Product* b) {
                if (a->best_selling_rank.has_value() != b->best_selling_rank.has_value()) {
                    return a->best_selling_rank.has_value();
                }
                return a->best_selling_rank && *a->best_selling_rank < *b->best_selling_rank;
            });
            break;
        case SortKey::alpha_az:
            std::stable_sort(out.begin(), out.end(), [](const Product* a, const Product* b) { return a->title < b->title; });
            break;
        case SortKey::alpha_za:
            std::stable_sort(out.begin(), out.end(), [](const Product* a, const Product* b) { return a->title > b->title; });
            break;
        case SortKey::price_asc:
            std::stable_sort(out.begin(), out.end(),
                             [](const Product* a, const Product* b) { return a->price_min < b->price_min; });
            break;
        case SortKey::price_desc:
            std::stable_sort(out.begin(), out.end(),
                             [](const Product* a, const Product* b) { return a->price_min > b->price_min; });
            break;
        case SortKey::date_new:
            std::stable_sort(out.begin(), out.end(),
                             [](const Product* a, const Product* b) { return a->created_ordinal > b->created_ordinal; });
            break;
        case SortKey::date_old:
            std::stable_sort(out.begin(), out.end(),
                             [](const Product* a, const Product* b) { return a->created_ordinal < b->created_ordinal; });
            break;
    }
    return out;
}

PageSlice paginate(const std::vector<const Product*>& products, std::size_t loaded) {
    PageSlice slice;
    if (loaded == 0) {
        const std::size_t n = std::min(products.size(), kListingPageSize);
        slice.items.assign(products.begin(), products.begin() + static_cast<std::ptrdiff_t>(n));
        slice.has_more = products.size() > kListingPageSize;
        return slice;
    }
    if (loaded == kListingPageSize) {
        if (products.size() > kListingPageSize) {
            slice.items.assign(products.begin() + static_cast<std::ptrdiff_t>(kListingPageSize), products.end());
        }
        return slice;
    }
    throw std::invalid_argument("loaded must be 0 or " + std::to_string(kListingPageSize));
}

std::vector<const Product*> search_products(const ShopBundle& bundle, std::string_view q) {
    std::vector<const Product*> exact;
    std::vector<const Product*> rest;
    if (q.empty()) return exact;
    for (const auto& p : bundle.products()) {
        if (!p.is_active()) continue;
        bool hit = icontains(p.title, q) || icontains(p.vendor, q) || icontains(p.product_type, q);
        for (const auto& tag : p.tags) hit = hit || icontains(tag, q);
        if (!hit) continue;
        (iequals(p.title, q) ? exact : rest).push_back(&p);
    }
    exact.insert(exact.end(), rest.begin(), rest.end());
    return exact;
}

json suggest_json(const ShopBundle& bundle, std::string_view q, std::size_t limit) {
    json products = json::array();
    for (const Product* p : search_products(bundle, q)) {
        if (products.size() >= limit) break;
        std::optional<Money> cmp_min;
        std::optional<Money> cmp_max;
        for (const auto& v : p->variants) {
            if (!v.compare_at_price) continue;
            cmp_min = cmp_min ? std::min(*cmp_min, *v.compare_at_price) : *v.compare_at_price;
            cmp_max = cmp_max ? std::max(*cmp_max, *v.compare_at_price) : *v.compare_at_price;
        }
        products.push_back({
            {"title", p->title},
            {"handle", p->handle},
            {"price", p->price_min.to_string()},
            {"price_max", p->price_max.to_string()},
            {"compare_at_price_min", cmp_min ? json(cmp_min->to_string()) : json(nullptr)},
            {"compare_at_price_max", cmp_max ? json(cmp_max->to_string()) : json(nullptr)},
            {"available", p->any_available()},
            {"url", "/products/" + p->handle},
            {"vendor", p->vendor},
            {"featured_image", p->images.empty() ? json(nullptr) : json(p->images.front())},
            {"tags", p->tags},
            {"type", p->product_type},
        });
    }
    return json{{"query", std::string(q)}, {"products", std::move(products)}};
}

// ---------------------------------------------------------------------------
// Cart

std::int64_t CartState::item_count() const {
    std::int64_t n = 0;
    for (const auto& line : lines) n += line.quantity;
    return n;
}

const CartLine* CartState::find(std::string_view variant_id) const {
    for (const auto& line : lines) {
        if (line.variant_id == variant_id) return &line;
    }
    return nullptr;
}

void recompute_totals(CartState& cart) {
    cart.subtotal = Money{};
    cart.savings = Money{};
    for (const auto& line : cart.lines) {
        cart.subtotal += line.line_total();
        if (line.compare_at_price && *line.compare_at_price > line.unit_price) {
            cart.savings += (*line.compare_at_price - line.unit_price) * line.quantity;
        }
    }
}

namespace {

ShopBundle::VariantRef resolve_variant(const ShopBundle& bundle, std::string_view variant_id) {
    const auto ref = bundle.find_variant(variant_id);
    if (!ref) throw CartError(404, "unknown variant '" + std::string(variant_id) + "'");
    return *ref;
}

void require_purchasable(const ShopBundle::VariantRef& ref) {
    if (!ref.product->is_active()) throw CartError(422, "product '" + ref.product->handle + "' is not for sale");
    if (!ref.variant->available) throw CartError(422, "variant '" + ref.variant->id + "' is sold out");
}

CartLine make_line(const ShopBundle::VariantRef& ref, std::int64_t quantity) {
    CartLine line;
    line.variant_id = ref.variant->id;
    line.product_handle = ref.product->handle;
    line.title = ref.product->title;
    if (!ref.variant->options.empty()) {
        line.title += " -";
        for (std::size_t i = 0; i < ref.variant->options.size(); ++i) {
            line.title += (i == 0 ? " " : " / ") + ref.variant->options[i].second;
        }
    }
    line.quantity = quantity;
    line.unit_price = ref.variant->price;
    line.compare_at_price = ref.variant->compare_at_price;
    return line;
}

}  // namespace

void cart_add(CartState& cart, const ShopBundle& bundle, std::string_view variant_id, std::int64_t quantity) {
    const auto ref = resolve_variant(bundle, variant_id);
    if (quantity < 0) throw CartError(400, "quantity must not be negative");
    require_purchasable(ref);
    if (quantity == 0) return;
    for (auto& line : cart.lines) {
        if (line.variant_id == variant_id) {
            line.quantity += quantity;
            recompute_totals(cart);
            return;
        }
    }
    cart.lines.push_back(make_line(ref, quantity));
    recompute_totals(cart);
}

void cart_set_quantity(CartState& cart, const ShopBundle& bundle, std::string_view variant_id, std::int64_t quantity) {
    const auto ref = resolve_variant(bundle, variant_id);
    if (quantity < 0) throw CartError(400, "quantity must not be negative");
    auto it = std::find_if(cart.lines.begin(), cart.lines.end(),
                           [&](const CartLine& line) { return line.variant_id == variant_id; });
    if (quantity == 0) {
        if (it != cart.lines.end()) cart.lines.erase(it);
    } else if (it != cart.lines.end()) {
        it->quantity = quantity;
    } else {
        require_purchasable(ref);
        cart.lines.push_back(make_line(ref, quantity));
    }
    recompute_totals(cart);
}

void cart_remove(CartState& cart, std::string_view variant_id) {
    std::erase_if(cart.lines, [&](const CartLine& line) { return line.variant_id == variant_id; });
    recompute_totals(cart);
}

void to_json(json& j, const CartLine& line) {
    j = json{{"variant_id", line.variant_id},
             {"product_handle", line.product_handle},
             {"title", line.title},
             {"quantity", line.quantity},
             {"unit_price", line.unit_price.to_string()},
             {"compare_at_price", line.compare_at_price ? json(line.compare_at_price->to_string()) : json(nullptr)},
             {"line_total", line.line_total().to_string()}};
}

void to_json(json& j, const CartState& cart) {
    j = json{{"session_id", cart.session_id},
             {"lines", cart.lines},
             {"item_count", cart.item_count()},
             {"subtotal", cart.subtotal.to_string()},
             {"savings", cart.savings.to_string()}};
}

CartState cart_from_json(const json& j) {
    CartState cart;
    cart.session_id = j.value("session_id", "");
    for (const auto& item : j.at("lines")) {
        CartLine line;
        line.variant_id = item.at("variant_id").get<std::string>();
        line.product_handle = item.value("product_handle", "");
        line.title = item.value("title", "");
        line.quantity = item.at("quantity").get<std::int64_t>();
        line.unit_price = Money::from_json_value(item.at("unit_price"));
        if (item.contains("compare_at_price") && !item["compare_at_price"].is_null()) {
            line.compare_at_price = Money::from_json_value(item["compare_at_price"]);
        }
        cart.lines.push_back(std::move(line));
    }
    recompute_totals(cart);
    return cart;
}

}  // namespace storebench
