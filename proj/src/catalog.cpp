#include "storebench/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace storebench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// String helpers

std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

bool icontains(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) {
        return true;
    }
    const auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                                [](unsigned char x, unsigned char y) { return std::tolower(x) == std::tolower(y); });
    return it != haystack.end();
}

bool is_valid_handle(std::string_view handle) {
    if (handle.empty()) {
        return false;
    }
    return std::all_of(handle.begin(), handle.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    });
}

std::string slugify(std::string_view text) {
    std::string out;
    bool pending_dash = false;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (pending_dash && !out.empty()) {
                out += '-';
            }
            pending_dash = false;
            out += static_cast<char>(std::tolower(c));
        } else {
            pending_dash = true;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model helpers

const std::string* Variant::option(std::string_view dimension) const {
    for (const auto& [dim, value] : options) {
        if (iequals(dim, dimension)) {
            return &value;
        }
    }
    return nullptr;
}

bool Product::any_available() const {
    return std::any_of(variants.begin(), variants.end(), [](const Variant& v) { return v.available; });
}

bool Product::any_on_sale() const {
    return std::any_of(variants.begin(), variants.end(), [](const Variant& v) { return v.on_sale(); });
}

bool Product::has_axis(std::string_view dimension) const {
    return std::any_of(option_axes.begin(), option_axes.end(),
                       [&](const std::string& axis) { return iequals(axis, dimension); });
}

std::string PageDoc::route() const {
    return (kind == PageKind::native_policy ? "/policies/" : "/pages/") + handle;
}

std::optional<SortKey> parse_sort_key(std::string_view text) {
    static const std::pair<std::string_view, SortKey> names[] = {
        {"featured", SortKey::featured},
        {"best_selling", SortKey::best_selling},
        {"alpha_az", SortKey::alpha_az},
        {"alphabetically_az", SortKey::alpha_az},
        {"alpha_za", SortKey::alpha_za},
        {"alphabetically_za", SortKey::alpha_za},
        {"price_asc", SortKey::price_asc},
        {"price_desc", SortKey::price_desc},
        {"date_new", SortKey::date_new},
        {"date_old", SortKey::date_old},
    };
    for (const auto& [name, key] : names) {
        if (name == text) {
            return key;
        }
    }
    return std::nullopt;
}

std::string_view sort_key_name(SortKey key) {
    switch (key) {
        case SortKey::featured: return "featured";
        case SortKey::best_selling: return "best_selling";
        case SortKey::alpha_az: return "alpha_az";
        case SortKey::alpha_za: return "alpha_za";
        case SortKey::price_asc: return "price_asc";
        case SortKey::price_desc: return "price_desc";
        case SortKey::date_new: return "date_new";
        case SortKey::date_old: return "date_old";
    }
    return "featured";
}

std::string_view sort_key_label(SortKey key) {
    switch (key) {
        case SortKey::featured: return "Featured";
        case SortKey::best_selling: return "Best selling";
        case SortKey::alpha_az: return "Alphabetically, A-Z";
        case SortKey::alpha_za: return "Alphabetically, Z-A";
        case SortKey::price_asc: return "Price, low to high";
        case SortKey::price_desc: return "Price, high to low";
        case SortKey::date_new: return "Date, new to old";
        case SortKey::date_old: return "Date, old to new";
    }
    return "Featured";
}

std::vector<SortKey> Capabilities::sort_keys() const {
    std::vector<SortKey> keys;
    for (const auto& name : collection.sort) {
        auto key = parse_sort_key(name);
        if (!key) {
            throw CapabilityError("capabilities.json: collection.sort entry '" + name + "' is not a canonical sort key");
        }
        keys.push_back(*key);
    }
    return keys;
}

bool Capabilities::has_filter(std::string_view name) const {
    return std::find(collection.filters.begin(), collection.filters.end(), name) != collection.filters.end();
}

// ---------------------------------------------------------------------------
// Option index

int facet_count(const OptionIndex& index, std::string_view dimension, std::string_view value) {
    for (const auto& [dim, values] : index) {
        if (!iequals(dim, dimension)) {
            continue;
        }
        for (const auto& [val, count] : values) {
            if (iequals(val, value)) {
                return count;
            }
        }
    }
    return 0;
}

bool product_realizes(const Product& product, std::string_view dimension, std::string_view value) {
    if (iequals(dimension, kBrandDimension)) {
        return !product.vendor.empty() && iequals(product.vendor, value);
    }
    if (iequals(dimension, kTypeDimension)) {
        return !product.product_type.empty() && iequals(product.product_type, value);
    }
    return std::any_of(product.variants.begin(), product.variants.end(), [&](const Variant& v) {
        const std::string* realized = v.option(dimension);
        return realized != nullptr && iequals(*realized, value);
    });
}

bool product_has_dimension(const Product& product, std::string_view dimension) {
    if (iequals(dimension, kBrandDimension)) {
        return !product.vendor.empty();
    }
    if (iequals(dimension, kTypeDimension)) {
        return !product.product_type.empty();
    }
    return std::any_of(product.variants.begin(), product.variants.end(),
                       [&](const Variant& v) { return v.option(dimension) != nullptr; });
}

OptionIndex build_option_index(const Collection& collection, const ShopBundle& bundle) {
    OptionIndex index;
    std::set<std::string> seen_products;
    for (const Product* product : bundle.collection_products(collection)) {
        if (!seen_products.insert(product->handle).second) {
            continue;
        }
        // One count per distinct (dim, value) the product carries.
        std::set<std::pair<std::string, std::string>> realized;
        for (const auto& variant : product->variants) {
            for (const auto& [dim, value] : variant.options) {
                realized.emplace(dim, value);
            }
        }
        if (!product->vendor.empty()) {
            realized.emplace(std::string(kBrandDimension), product->vendor);
        }
        if (!product->product_type.empty()) {
            realized.emplace(std::string(kTypeDimension), product->product_type);
        }
        for (const auto& [dim, value] : realized) {
            ++index[dim][value];
        }
    }
    return index;
}

// ---------------------------------------------------------------------------
// Bundle

ShopBundle::ShopBundle(std::string shop_slug, std::vector<Product> products, std::vector<Collection> collections,
                       std::vector<PageDoc> pages, Capabilities capabilities, ShopStats stats)
    : shop_slug_(std::move(shop_slug)),
      products_(std::move(products)),
      collections_(std::move(collections)),
      pages_(std::move(pages)),
      capabilities_(std::move(capabilities)),
      stats_(std::move(stats)) {
    reindex();
}

void ShopBundle::reindex() {
    product_by_handle_.clear();
    collection_by_handle_.clear();
    custom_page_by_handle_.clear();
    policy_by_handle_.clear();
    variant_by_id_.clear();
    option_indexes_.clear();
    for (std::size_t i = 0; i < products_.size(); ++i) {
        product_by_handle_.emplace(to_lower(products_[i].handle), i);
        for (std::size_t j = 0; j < products_[i].variants.size(); ++j) {
            variant_by_id_.emplace(products_[i].variants[j].id, std::make_pair(i, j));
        }
    }
    for (std::size_t i = 0; i < collections_.size(); ++i) {
        collection_by_handle_.emplace(to_lower(collections_[i].handle), i);
    }
    for (std::size_t i = 0; i < pages_.size(); ++i) {
        auto& table = pages_[i].kind == PageKind::native_policy ? policy_by_handle_ : custom_page_by_handle_;
        table.emplace(to_lower(pages_[i].handle), i);
    }
    for (const auto& collection : collections_) {
        option_indexes_.emplace(to_lower(collection.handle), build_option_index(collection, *this));
    }
}

const Product* ShopBundle::find_product(std::string_view handle) const {
    auto it = product_by_handle_.find(to_lower(handle));
    return it == product_by_handle_.end() ? nullptr : &products_[it->second];
}

const Collection* ShopBundle::find_collection(std::string_view handle) const {
    auto it = collection_by_handle_.find(to_lower(handle));
    return it == collection_by_handle_.end() ? nullptr : &collections_[it->second];
}

const PageDoc* ShopBundle::find_page(PageKind kind, std::string_view handle) const {
    const auto& table = kind == PageKind::native_policy ? policy_by_handle_ : custom_page_by_handle_;
    auto it = table.find(to_lower(handle));
    return it == table.end() ? nullptr : &pages_[it->second];
}

const PageDoc* ShopBundle::find_any_page(std::string_view handle) const {
    if (const PageDoc* page = find_page(PageKind::custom_page, handle)) {
        return page;
    }
    return find_page(PageKind::native_policy, handle);
}

std::optional<ShopBundle::VariantRef> ShopBundle::find_variant(std::string_view id) const {
    auto it = variant_by_id_.find(std::string(id));
    if (it == variant_by_id_.end()) {
        return std::nullopt;
    }
    const Product& product = products_[it->second.first];
    return VariantRef{&product, &product.variants[it->second.second]};
}

std::vector<const Product*> ShopBundle::collection_products(const Collection& collection) const {
    std::vector<const Product*> out;
    out.reserve(collection.product_handles.size());
    for (const auto& handle : collection.product_handles) {
        if (const Product* product = find_product(handle)) {
            out.push_back(product);
        }
    }
    return out;
}

std::vector<const Collection*> ShopBundle::collections_containing(std::string_view product_handle) const {
    std::vector<const Collection*> out;
    for (const auto& collection : collections_) {
        for (const auto& handle : collection.product_handles) {
            if (iequals(handle, product_handle)) {
                out.push_back(&collection);
                break;
            }
        }
    }
    return out;
}

const OptionIndex& ShopBundle::option_index(std::string_view collection_handle) const {
    static const OptionIndex empty;
    auto it = option_indexes_.find(to_lower(collection_handle));
    return it == option_indexes_.end() ? empty : it->second;
}

std::vector<std::string> ShopBundle::dimension_vocabulary() const {
    std::vector<std::string> out;
    for (const auto& product : products_) {
        for (const auto& axis : product.option_axes) {
            const bool known = std::any_of(out.begin(), out.end(), [&](const std::string& d) { return iequals(d, axis); });
            if (!known) {
                out.push_back(axis);
            }
        }
    }
    return out;
}

namespace {

void check_unique_handles(const std::vector<std::string>& handles, const std::string& what) {
    std::set<std::string> seen;
    std::vector<std::string> invalid;
    std::vector<std::string> duplicate;
    for (const auto& handle : handles) {
        if (!is_valid_handle(handle)) {
            invalid.push_back(handle);
        }
        if (!seen.insert(to_lower(handle)).second) {
            duplicate.push_back(handle);
        }
    }
    if (!invalid.empty()) {
        throw IntegrityError(what + " handles must be non-empty, lowercase and URL-safe", invalid);
    }
    if (!duplicate.empty()) {
        throw IntegrityError("duplicate " + what + " handles", duplicate);
    }
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += items[i];
    }
    return out;
}

}  // namespace

void ShopBundle::verify() const {
    std::vector<std::string> handles;
    for (const auto& p : products_) {
        handles.push_back(p.handle);
    }
    check_unique_handles(handles, "product");

    handles.clear();
    for (const auto& c : collections_) {
        handles.push_back(c.handle);
    }
    check_unique_handles(handles, "collection");

    for (PageKind kind : {PageKind::custom_page, PageKind::native_policy}) {
        handles.clear();
        for (const auto& page : pages_) {
            if (page.kind == kind) {
                handles.push_back(page.handle);
            }
        }
        check_unique_handles(handles, kind == PageKind::native_policy ? "policy" : "page");
    }

    std::vector<std::string> bad_policies;
    for (const auto& page : pages_) {
        if (page.kind == PageKind::native_policy && !page.handle.ends_with("-policy")) {
            bad_policies.push_back(page.handle);
        }
    }
    if (!bad_policies.empty()) {
        throw IntegrityError("native policy handles must end in '-policy'", bad_policies);
    }

    std::set<std::string> variant_ids;
    std::vector<std::string> product_problems;
    for (const auto& product : products_) {
        if (product.variants.empty()) {
            product_problems.push_back(product.handle + ": no variants");
            continue;
        }
        Money lo = product.variants.front().price;
        Money hi = lo;
        for (const auto& variant : product.variants) {
            if (variant.id.empty() || !variant_ids.insert(variant.id).second) {
                product_problems.push_back(product.handle + ": duplicate or empty variant id '" + variant.id + "'");
            }
            if (variant.price < Money{}) {
                product_problems.push_back(product.handle + ": negative price");
            }
            if (variant.compare_at_price && *variant.compare_at_price < variant.price) {
                product_problems.push_back(product.handle + ": compare_at_price below price on " + variant.id);
            }
            for (const auto& [dim, value] : variant.options) {
                if (!product.has_axis(dim)) {
                    product_problems.push_back(product.handle + ": option '" + dim + "' is not a declared axis");
                }
            }
            lo = std::min(lo, variant.price);
            hi = std::max(hi, variant.price);
        }
        if (product.price_min != lo || product.price_max != hi) {
            product_problems.push_back(product.handle + ": price_min/price_max disagree with variant prices");
        }
        if (product.gift_card) {
            for (const auto& axis : product.option_axes) {
                if (!iequals(axis, "Denomination")) {
                    product_problems.push_back(product.handle + ": gift card carries physical option '" + axis + "'");
                }
            }
        }
    }
    if (!product_problems.empty()) {
        throw IntegrityError("product invariants violated", product_problems);
    }

    std::vector<std::string> dangling;
    for (const auto& collection : collections_) {
        for (const auto& handle : collection.product_handles) {
            if (find_product(handle) == nullptr) {
                dangling.push_back(collection.handle + " -> " + handle);
            }
        }
    }
    if (!dangling.empty()) {
        throw IntegrityError("collections.json references unknown products: " + join(dangling, ", "), dangling);
    }

    const auto& caps = capabilities_;
    caps.sort_keys();
    if (caps.collection.pagination != "load_more") {
        throw CapabilityError("capabilities.json: pagination mode '" + caps.collection.pagination +
                              "' is not supported (only load_more)");
    }
    std::vector<std::string> missing_pages;
    for (const auto& handle : caps.info_pages_present) {
        if (find_any_page(handle) == nullptr) {
            missing_pages.push_back(handle);
        }
    }
    if (!missing_pages.empty()) {
        throw IntegrityError("info_pages_present names pages absent from pages.json: " + join(missing_pages, ", "),
                             missing_pages);
    }

    const auto differences = stats_differences(stats_, compute_stats(*this));
    if (!differences.empty()) {
        throw IntegrityError("stats.json disagrees with the catalog: " + join(differences, ", "), differences);
    }
}

// ---------------------------------------------------------------------------
// Stats

namespace {

double median_of(std::vector<std::int64_t> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) {
        return static_cast<double>(values[n / 2]);
    }
    return (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

}  // namespace

ShopStats compute_stats(const ShopBundle& bundle) {
    ShopStats stats;
    const auto& products = bundle.products();
    const auto& collections = bundle.collections();
    stats.products_total = static_cast<std::int64_t>(products.size());
    stats.collections_total = static_cast<std::int64_t>(collections.size());

    if (!collections.empty()) {
        std::vector<std::int64_t> sizes;
        std::int64_t total = 0;
        for (const auto& c : collections) {
            sizes.push_back(static_cast<std::int64_t>(c.product_handles.size()));
            total += sizes.back();
        }
        const double avg = static_cast<double>(total) / static_cast<double>(sizes.size());
        stats.products_per_collection.avg = std::round(avg * 100.0) / 100.0;
        stats.products_per_collection.median = median_of(sizes);
        stats.products_per_collection.max = *std::max_element(sizes.begin(), sizes.end());
    }

    std::vector<Money> prices;
    std::size_t multi_variant = 0;
    std::set<std::string> axes;
    for (const auto& product : products) {
        for (const auto& variant : product.variants) {
            prices.push_back(variant.price);
        }
        if (product.variants.size() > 1) {
            ++multi_variant;
        }
        for (const auto& axis : product.option_axes) {
            axes.insert(to_lower(axis));
        }
    }
    if (!prices.empty()) {
        std::sort(prices.begin(), prices.end());
        ShopStats::Price price;
        price.min = prices.front();
        price.max = prices.back();
        const std::size_t n = prices.size();
        price.median = n % 2 == 1 ? prices[n / 2] : midpoint(prices[n / 2 - 1], prices[n / 2]);
        price.currency = bundle.capabilities().shop.currency;
        stats.price = price;
    }
    stats.products_with_variants_pct =
        products.empty() ? 0.0 : static_cast<double>(multi_variant) / static_cast<double>(products.size());
    stats.variant_axes_observed.assign(axes.begin(), axes.end());
    stats.navigation_depth_max = bundle.capabilities().site_shell.nav_depth;
    stats.homepage_section_count = static_cast<std::int64_t>(bundle.capabilities().homepage.section_types.size());
    stats.info_pages_count = static_cast<std::int64_t>(bundle.capabilities().info_pages_present.size());
    stats.feature_count = bundle.stats().feature_count;
    return stats;
}

std::vector<std::string> stats_differences(const ShopStats& declared, const ShopStats& computed) {
    std::vector<std::string> out;
    if (declared.products_total != computed.products_total) out.push_back("products_total");
    if (declared.collections_total != computed.collections_total) out.push_back("collections_total");
    if (!(declared.products_per_collection == computed.products_per_collection)) {
        out.push_back("products_per_collection");
    }
    if (declared.price != computed.price) out.push_back("price");
    if (declared.products_with_variants_pct != computed.products_with_variants_pct) {
        out.push_back("products_with_variants_pct");
    }
    if (declared.variant_axes_observed != computed.variant_axes_observed) out.push_back("variant_axes_observed");
    if (declared.navigation_depth_max != computed.navigation_depth_max) out.push_back("navigation_depth_max");
    if (declared.homepage_section_count != computed.homepage_section_count) out.push_back("homepage_section_count");
    if (declared.info_pages_count != computed.info_pages_count) out.push_back("info_pages_count");
    return out;
}

// ---------------------------------------------------------------------------
// Discovery helpers

bool is_generic_collection(std::string_view handle, const std::vector<std::string>& generic) {
    if (handle.empty()) {
        return false;
    }
    return std::any_of(generic.begin(), generic.end(), [&](const std::string& g) { return iequals(g, handle); });
}

std::vector<const Product*> eligible_discovery_products(const ShopBundle& bundle) {
    std::map<std::string, const Product*> by_type;
    for (const auto& product : bundle.products()) {
        if (!product.is_active() || product.gift_card || !product.any_available()) {
            continue;
        }
        auto [it, inserted] = by_type.emplace(to_lower(product.product_type), &product);
        if (!inserted && product.handle < it->second->handle) {
            it->second = &product;
        }
    }
    std::vector<const Product*> out;
    for (const auto& [type, product] : by_type) {
        out.push_back(product);
    }
    std::sort(out.begin(), out.end(), [](const Product* a, const Product* b) { return a->handle < b->handle; });
    return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return fallback;
    }
    return it->get<T>();
}

json optional_bool(const std::optional<bool>& value) {
    return value ? json(*value) : json(nullptr);
}

std::optional<bool> read_optional_bool(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return std::nullopt;
    }
    return it->get<bool>();
}

}  // namespace

void to_json(json& j, const Variant& v) {
    json options = json::object();
    for (const auto& [dim, value] : v.options) {
        options[dim] = value;
    }
    j = json{{"id", v.id},
             {"options", options},
             {"price", v.price.to_string()},
             {"compare_at_price", v.compare_at_price ? json(v.compare_at_price->to_string()) : json(nullptr)},
             {"available", v.available}};
}

void to_json(json& j, const Product& p) {
    j = json{{"handle", p.handle},
             {"title", p.title},
             {"vendor", p.vendor},
             {"product_type", p.product_type},
             {"description", p.description},
             {"tags", p.tags},
             {"status", p.is_active() ? "active" : "inactive"},
             {"gift_card", p.gift_card},
             {"options", p.option_axes},
             {"variants", p.variants},
             {"price_min", p.price_min.to_string()},
             {"price_max", p.price_max.to_string()},
             {"images", p.images},
             {"created_ordinal", p.created_ordinal}};
    if (p.best_selling_rank) {
        j["best_selling_rank"] = *p.best_selling_rank;
    }
    if (!p.reviews.empty()) {
        json reviews = json::array();
        for (const auto& r : p.reviews) {
            reviews.push_back({{"author", r.author}, {"rating", r.rating}, {"title", r.title}, {"body", r.body}});
        }
        j["reviews"] = reviews;
    }
}

Product product_from_json(const json& j) {
    Product p;
    p.handle = j.at("handle").get<std::string>();
    p.title = j.at("title").get<std::string>();
    p.vendor = value_or<std::string>(j, "vendor", "");
    p.product_type = value_or<std::string>(j, "product_type", "");
    p.description = value_or<std::string>(j, "description", "");
    p.tags = value_or<std::vector<std::string>>(j, "tags", {});
    const auto status = value_or<std::string>(j, "status", "active");
    if (status == "active") {
        p.status = ProductStatus::active;
    } else if (status == "inactive") {
        p.status = ProductStatus::inactive;
    } else {
        throw std::invalid_argument("product " + p.handle + ": unknown status '" + status + "'");
    }
    p.gift_card = value_or<bool>(j, "gift_card", false);
    p.option_axes = value_or<std::vector<std::string>>(j, "options", {});
    const bool derive_axes = !j.contains("options");
    for (const auto& jv : j.at("variants")) {
        Variant v;
        v.id = jv.at("id").is_string() ? jv.at("id").get<std::string>() : jv.at("id").dump();
        v.price = Money::from_json_value(jv.at("price"));
        if (auto it = jv.find("compare_at_price"); it != jv.end() && !it->is_null()) {
            v.compare_at_price = Money::from_json_value(*it);
        }
        v.available = value_or<bool>(jv, "available", true);
        if (auto it = jv.find("options"); it != jv.end() && it->is_object()) {
            if (derive_axes) {
                for (const auto& [dim, value] : it->items()) {
                    if (std::find(p.option_axes.begin(), p.option_axes.end(), dim) == p.option_axes.end()) {
                        p.option_axes.push_back(dim);
                    }
                }
            }
            // Order pairs by the declared axis order; undeclared dims keep map order and
            // are reported by verify().
            for (const auto& axis : p.option_axes) {
                if (auto found = it->find(axis); found != it->end()) {
                    v.options.emplace_back(axis, found->get<std::string>());
                }
            }
            for (const auto& [dim, value] : it->items()) {
                if (std::find(p.option_axes.begin(), p.option_axes.end(), dim) == p.option_axes.end()) {
                    v.options.emplace_back(dim, value.get<std::string>());
                }
            }
        }
        p.variants.push_back(std::move(v));
    }
    if (!p.variants.empty()) {
        p.price_min = p.price_max = p.variants.front().price;
        for (const auto& v : p.variants) {
            p.price_min = std::min(p.price_min, v.price);
            p.price_max = std::max(p.price_max, v.price);
        }
    }
    // Declared bounds are checked against the variants by verify().
    if (auto it = j.find("price_min"); it != j.end() && !it->is_null()) {
        p.price_min = Money::from_json_value(*it);
    }
    if (auto it = j.find("price_max"); it != j.end() && !it->is_null()) {
        p.price_max = Money::from_json_value(*it);
    }
    p.images = value_or<std::vector<std::string>>(j, "images", {});
    p.created_ordinal = value_or<std::int64_t>(j, "created_ordinal", 0);
    if (auto it = j.find("best_selling_rank"); it != j.end() && !it->is_null()) {
        p.best_selling_rank = it->get<std::int64_t>();
    }
    if (auto it = j.find("reviews"); it != j.end() && it->is_array()) {
        for (const auto& jr : *it) {
            Review r;
            r.author = value_or<std::string>(jr, "author", "");
            r.rating = value_or<int>(jr, "rating", 5);
            r.title = value_or<std::string>(jr, "title", "");
            r.body = value_or<std::string>(jr, "body", "");
            p.reviews.push_back(std::move(r));
        }
    }
    return p;
}

void to_json(json& j, const Collection& c) {
    j = json{{"handle", c.handle},
             {"title", c.title},
             {"description", c.description},
             {"product_handles", c.product_handles}};
}

Collection collection_from_json(const json& j) {
    Collection c;
    c.handle = j.at("handle").get<std::string>();
    c.title = j.at("title").get<std::string>();
    c.description = value_or<std::string>(j, "description", "");
    c.product_handles = value_or<std::vector<std::string>>(j, "product_handles", {});
    return c;
}

void to_json(json& j, const PageDoc& p) {
    j = json{{"handle", p.handle},
             {"title", p.title},
             {"body", p.body},
             {"kind", p.kind == PageKind::native_policy ? "native_policy" : "custom_page"}};
}

PageDoc page_from_json(const json& j) {
    PageDoc p;
    p.handle = j.at("handle").get<std::string>();
    p.title = j.at("title").get<std::string>();
    p.body = value_or<std::string>(j, "body", "");
    const auto kind = value_or<std::string>(j, "kind", "custom_page");
    if (kind == "custom_page") {
        p.kind = PageKind::custom_page;
    } else if (kind == "native_policy") {
        p.kind = PageKind::native_policy;
    } else {
        throw std::invalid_argument("page " + p.handle + ": unknown kind '" + kind + "'");
    }
    return p;
}

void to_json(json& j, const Capabilities& c) {
    json shop{{"descriptor", c.shop.descriptor},
              {"category", c.shop.category},
              {"currency", c.shop.currency},
              {"tone", c.shop.tone}};
    if (c.shop.name) shop["name"] = *c.shop.name;
    if (c.shop.country) shop["country"] = *c.shop.country;
    if (c.shop.language) shop["language"] = *c.shop.language;
    j = json{
        {"version", c.version},
        {"shop", shop},
        {"site_shell",
         {{"has_announcement_bar", c.site_shell.has_announcement_bar},
          {"header_style", c.site_shell.header_style},
          {"has_mega_menu", c.site_shell.has_mega_menu},
          {"nav_depth", c.site_shell.nav_depth},
          {"footer_groups", c.site_shell.footer_groups}}},
        {"homepage",
         {{"section_types", c.homepage.section_types},
          {"section_count", c.homepage.section_count},
          {"has_popup_modal", c.homepage.has_popup_modal}}},
        {"collection",
         {{"layout", c.collection.layout},
          {"columns_desktop", c.collection.columns_desktop},
          {"filters", c.collection.filters},
          {"sort", c.collection.sort},
          {"pagination", c.collection.pagination}}},
        {"product",
         {{"gallery_style", c.product.gallery_style},
          {"variant_selectors", c.product.variant_selectors},
          {"has_quantity_selector", c.product.has_quantity_selector},
          {"description_layout", c.product.description_layout},
          {"has_reviews", c.product.has_reviews},
          {"has_recommendations", c.product.has_recommendations},
          {"has_personalization", c.product.has_personalization}}},
        {"cart",
         {{"type", c.cart.type},
          {"has_promo_input", c.cart.has_promo_input},
          {"has_upsells", c.cart.has_upsells},
          {"has_shipping_estimate", c.cart.has_shipping_estimate}}},
        {"search",
         {{"trigger", c.search.trigger},
          {"has_predictive", c.search.has_predictive},
          {"predictive_types", c.search.predictive_types},
          {"results_layout", c.search.results_layout}}},
        {"intl",
         {{"has_locale_switcher", optional_bool(c.intl.has_locale_switcher)},
          {"has_currency_switcher", optional_bool(c.intl.has_currency_switcher)}}},
        {"floating",
         {{"has_chat_widget", c.floating.has_chat_widget},
          {"has_age_gate", c.floating.has_age_gate},
          {"has_cookie_banner", c.floating.has_cookie_banner},
          {"has_newsletter_popup", c.floating.has_newsletter_popup}}},
        {"info_pages_present", c.info_pages_present},
    };
}

Capabilities capabilities_from_json(const json& j) {
    Capabilities c;
    c.version = value_or<std::string>(j, "version", "0.1");
    const auto& shop = j.at("shop");
    c.shop.descriptor = value_or<std::string>(shop, "descriptor", "");
    c.shop.category = value_or<std::string>(shop, "category", "");
    c.shop.currency = shop.at("currency").get<std::string>();
    c.shop.tone = value_or<std::vector<std::string>>(shop, "tone", {});
    if (shop.contains("name")) c.shop.name = shop.at("name").get<std::string>();
    if (shop.contains("country")) c.shop.country = shop.at("country").get<std::string>();
    if (shop.contains("language")) c.shop.language = shop.at("language").get<std::string>();

    const auto& shell = j.at("site_shell");
    c.site_shell.has_announcement_bar = value_or<bool>(shell, "has_announcement_bar", false);
    c.site_shell.header_style = value_or<std::string>(shell, "header_style", "");
    c.site_shell.has_mega_menu = value_or<bool>(shell, "has_mega_menu", false);
    c.site_shell.nav_depth = value_or<int>(shell, "nav_depth", 1);
    c.site_shell.footer_groups = value_or<int>(shell, "footer_groups", 0);

    const auto& home = j.at("homepage");
    c.homepage.section_types = value_or<std::vector<std::string>>(home, "section_types", {});
    c.homepage.section_count = value_or<int>(home, "section_count", static_cast<int>(c.homepage.section_types.size()));
    c.homepage.has_popup_modal = value_or<bool>(home, "has_popup_modal", false);

    const auto& coll = j.at("collection");
    c.collection.layout = value_or<std::string>(coll, "layout", "grid");
    c.collection.columns_desktop = value_or<int>(coll, "columns_desktop", 3);
    c.collection.filters = value_or<std::vector<std::string>>(coll, "filters", {});
    c.collection.sort = value_or<std::vector<std::string>>(coll, "sort", {});
    c.collection.pagination = value_or<std::string>(coll, "pagination", "load_more");

    const auto& prod = j.at("product");
    c.product.gallery_style = value_or<std::string>(prod, "gallery_style", "");
    c.product.variant_selectors = value_or<std::vector<std::string>>(prod, "variant_selectors", {});
    c.product.has_quantity_selector = value_or<bool>(prod, "has_quantity_selector", true);
    c.product.description_layout = value_or<std::string>(prod, "description_layout", "");
    c.product.has_reviews = value_or<bool>(prod, "has_reviews", false);
    c.product.has_recommendations = value_or<bool>(prod, "has_recommendations", false);
    c.product.has_personalization = value_or<bool>(prod, "has_personalization", false);

    const auto& cart = j.at("cart");
    c.cart.type = value_or<std::string>(cart, "type", "drawer");
    c.cart.has_promo_input = value_or<bool>(cart, "has_promo_input", false);
    c.cart.has_upsells = value_or<bool>(cart, "has_upsells", false);
    c.cart.has_shipping_estimate = value_or<bool>(cart, "has_shipping_estimate", false);

    const auto& search = j.at("search");
    c.search.trigger = value_or<std::string>(search, "trigger", "icon_button");
    c.search.has_predictive = value_or<bool>(search, "has_predictive", false);
    c.search.predictive_types = value_or<std::vector<std::string>>(search, "predictive_types", {});
    c.search.results_layout = value_or<std::string>(search, "results_layout", "fullpage");

    if (auto it = j.find("intl"); it != j.end()) {
        c.intl.has_locale_switcher = read_optional_bool(*it, "has_locale_switcher");
        c.intl.has_currency_switcher = read_optional_bool(*it, "has_currency_switcher");
    }
    if (auto it = j.find("floating"); it != j.end()) {
        c.floating.has_chat_widget = value_or<bool>(*it, "has_chat_widget", false);
        c.floating.has_age_gate = value_or<bool>(*it, "has_age_gate", false);
        c.floating.has_cookie_banner = value_or<bool>(*it, "has_cookie_banner", false);
        c.floating.has_newsletter_popup = value_or<bool>(*it, "has_newsletter_popup", false);
    }
    c.info_pages_present = value_or<std::vector<std::string>>(j, "info_pages_present", {});
    return c;
}

void to_json(json& j, const ShopStats& s) {
    j = json{{"products_total", s.products_total},
             {"collections_total", s.collections_total},
             {"products_per_collection",
              {{"avg", s.products_per_collection.avg},
               {"median", s.products_per_collection.median},
               {"max", s.products_per_collection.max}}}};
    if (s.price) {
        j["price"] = {{"min", s.price->min.to_double()},
                      {"max", s.price->max.to_double()},
                      {"median", s.price->median.to_double()},
                      {"currency", s.price->currency}};
    }
    j["products_with_variants_pct"] = s.products_with_variants_pct;
    j["variant_axes_observed"] = s.variant_axes_observed;
    j["navigation_depth_max"] = s.navigation_depth_max;
    j["homepage_section_count"] = s.homepage_section_count;
    j["info_pages_count"] = s.info_pages_count;
    if (s.feature_count) {
        j["feature_count"] = *s.feature_count;
    }
}

ShopStats stats_from_json(const json& j) {
    ShopStats s;
    s.products_total = j.at("products_total").get<std::int64_t>();
    s.collections_total = j.at("collections_total").get<std::int64_t>();
    const auto& per = j.at("products_per_collection");
    s.products_per_collection.avg = per.at("avg").get<double>();
    s.products_per_collection.median = per.at("median").get<double>();
    s.products_per_collection.max = per.at("max").get<std::int64_t>();
    if (auto it = j.find("price"); it != j.end() && !it->is_null()) {
        ShopStats::Price price;
        price.min = Money::from_json_value(it->at("min"));
        price.max = Money::from_json_value(it->at("max"));
        price.median = Money::from_json_value(it->at("median"));
        price.currency = it->at("currency").get<std::string>();
        s.price = price;
    }
    s.products_with_variants_pct = j.at("products_with_variants_pct").get<double>();
    s.variant_axes_observed = value_or<std::vector<std::string>>(j, "variant_axes_observed", {});
    s.navigation_depth_max = value_or<std::int64_t>(j, "navigation_depth_max", 0);
    s.homepage_section_count = value_or<std::int64_t>(j, "homepage_section_count", 0);
    s.info_pages_count = value_or<std::int64_t>(j, "info_pages_count", 0);
    if (auto it = j.find("feature_count"); it != j.end() && !it->is_null()) {
        s.feature_count = it->get<std::int64_t>();
    }
    if (s.products_total < 0 || s.collections_total < 0 || s.products_with_variants_pct < 0.0 ||
        s.products_with_variants_pct > 1.0) {
        throw std::invalid_argument("stats counts must be non-negative and the variant fraction in [0,1]");
    }
    if (s.price && !(s.price->min <= s.price->median && s.price->median <= s.price->max)) {
        throw std::invalid_argument("stats price must satisfy min <= median <= max");
    }
    return s;
}

// ---------------------------------------------------------------------------
// Directory IO

namespace {

json read_document(const std::filesystem::path& directory, const std::string& name) {
    const auto path = directory / name;
    std::ifstream in(path);
    if (!in) {
        throw LoadError(name, "missing or unreadable (" + path.string() + ")");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw LoadError(name, std::string("invalid JSON: ") + e.what());
    }
}

template <typename Fn>
auto parse_document(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw LoadError(name, std::string("schema error: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw LoadError(name, std::string("schema error: ") + e.what());
    }
}

void write_document(const std::filesystem::path& path, const json& document) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << document.dump(2) << '\n';
}

}  // namespace

ShopBundle load_shop_bundle(const std::filesystem::path& directory, std::optional<std::string> shop_slug) {
    // Read all five first so a missing file is reported before schema problems.
    const json products_doc = read_document(directory, "products.json");
    const json collections_doc = read_document(directory, "collections.json");
    const json pages_doc = read_document(directory, "pages.json");
    const json capabilities_doc = read_document(directory, "capabilities.json");
    const json stats_doc = read_document(directory, "stats.json");

    auto products = parse_document("products.json", [&] {
        std::vector<Product> out;
        for (const auto& item : products_doc) out.push_back(product_from_json(item));
        return out;
    });
    auto collections = parse_document("collections.json", [&] {
        std::vector<Collection> out;
        for (const auto& item : collections_doc) out.push_back(collection_from_json(item));
        return out;
    });
    auto pages = parse_document("pages.json", [&] {
        std::vector<PageDoc> out;
        for (const auto& item : pages_doc) out.push_back(page_from_json(item));
        return out;
    });
    auto capabilities = parse_document("capabilities.json", [&] { return capabilities_from_json(capabilities_doc); });
    auto stats = parse_document("stats.json", [&] { return stats_from_json(stats_doc); });

    std::string slug = shop_slug.value_or(std::filesystem::absolute(directory).lexically_normal().filename().string());
    if (slug.empty()) {
        slug = std::filesystem::absolute(directory).lexically_normal().parent_path().filename().string();
    }
    ShopBundle bundle(std::move(slug), std::move(products), std::move(collections), std::move(pages),
                      std::move(capabilities), std::move(stats));
    bundle.verify();
    return bundle;
}

void save_shop_bundle(const ShopBundle& bundle, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    write_document(directory / "products.json", json(bundle.products()));
    write_document(directory / "collections.json", json(bundle.collections()));
    write_document(directory / "pages.json", json(bundle.pages()));
    write_document(directory / "capabilities.json", json(bundle.capabilities()));
    write_document(directory / "stats.json", json(bundle.stats()));
}

}  // namespace storebench
