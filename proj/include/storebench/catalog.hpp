#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "storebench/money.hpp"

namespace storebench {

// ---------------------------------------------------------------------------
// Errors raised while loading a bundle directory.

class BundleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A document is missing or is not valid JSON for its schema. what() names the file.
class LoadError : public BundleError {
public:
    LoadError(std::string file, const std::string& detail)
        : BundleError(file + ": " + detail), file_(std::move(file)) {}
    const std::string& file() const { return file_; }

private:
    std::string file_;
};

/// Cross-document references do not resolve, or a documented invariant fails.
class IntegrityError : public BundleError {
public:
    IntegrityError(const std::string& detail, std::vector<std::string> offenders)
        : BundleError(detail), offenders_(std::move(offenders)) {}
    const std::vector<std::string>& offenders() const { return offenders_; }

private:
    std::vector<std::string> offenders_;
};

/// The capability document asks for behavior the engine does not implement.
class CapabilityError : public BundleError {
public:
    using BundleError::BundleError;
};

// ---------------------------------------------------------------------------
// Catalog

enum class ProductStatus { active, inactive };

struct Variant {
    std::string id;
    /// (dimension, value) pairs in the product's axis order.
    std::vector<std::pair<std::string, std::string>> options;
    Money price;
    std::optional<Money> compare_at_price;
    bool available = true;

    /// Case-insensitive dimension lookup.
    const std::string* option(std::string_view dimension) const;
    bool on_sale() const { return compare_at_price && *compare_at_price > price; }
};

struct Review {
    std::string author;
    int rating = 5;
    std::string title;
    std::string body;
};

struct Product {
    std::string handle;
    std::string title;
    std::string vendor;
    std::string product_type;
    std::string description;
    std::vector<std::string> tags;
    ProductStatus status = ProductStatus::active;
    bool gift_card = false;
    /// Declared option axes, e.g. {"Size", "Color"}. Empty for single default-variant products.
    std::vector<std::string> option_axes;
    std::vector<Variant> variants;
    Money price_min;
    Money price_max;
    std::vector<std::string> images;
    /// Creation order used by the date sorts; larger is newer.
    std::int64_t created_ordinal = 0;
    /// Position in the best-selling sort; absent means collection order.
    std::optional<std::int64_t> best_selling_rank;
    std::vector<Review> reviews;

    bool is_active() const { return status == ProductStatus::active; }
    bool any_available() const;
    bool any_on_sale() const;
    bool has_axis(std::string_view dimension) const;
};

struct Collection {
    std::string handle;
    std::string title;
    std::string description;
    std::vector<std::string> product_handles;
};

enum class PageKind { custom_page, native_policy };

struct PageDoc {
    std::string handle;
    std::string title;
    std::string body;
    PageKind kind = PageKind::custom_page;

    /// "/pages/<handle>" or "/policies/<handle>".
    std::string route() const;
};

// ---------------------------------------------------------------------------
// Capability document

enum class SortKey { featured, best_selling, alpha_az, alpha_za, price_asc, price_desc, date_new, date_old };

inline constexpr SortKey kAllSortKeys[] = {SortKey::featured,  SortKey::best_selling, SortKey::alpha_az,
                                           SortKey::alpha_za,  SortKey::price_asc,    SortKey::price_desc,
                                           SortKey::date_new,  SortKey::date_old};

/// Accepts the short canonical names and the long alphabetical spellings
/// ("alphabetically_az") used by exported capability documents.
std::optional<SortKey> parse_sort_key(std::string_view text);
std::string_view sort_key_name(SortKey key);
std::string_view sort_key_label(SortKey key);

struct Capabilities {
    std::string version = "0.1";

    struct Shop {
        std::string descriptor;
        std::string category;
        std::string currency = "USD";
        std::vector<std::string> tone;
        // Not part of exported documents; used by prompt assembly when present.
        std::optional<std::string> name;
        std::optional<std::string> country;
        std::optional<std::string> language;
    } shop;

    struct SiteShell {
        bool has_announcement_bar = false;
        std::string header_style = "single-row";
        bool has_mega_menu = false;
        int nav_depth = 1;
        int footer_groups = 2;
    } site_shell;

    struct Homepage {
        std::vector<std::string> section_types;
        int section_count = 0;
        bool has_popup_modal = false;
    } homepage;

    struct CollectionPage {
        std::string layout = "grid";
        int columns_desktop = 3;
        std::vector<std::string> filters;
        std::vector<std::string> sort;
        std::string pagination = "load_more";
    } collection;

    struct ProductPage {
        std::string gallery_style;
        std::vector<std::string> variant_selectors;
        bool has_quantity_selector = true;
        std::string description_layout;
        bool has_reviews = false;
        bool has_recommendations = false;
        bool has_personalization = false;
    } product;

    struct Cart {
        std::string type = "drawer";
        bool has_promo_input = false;
        bool has_upsells = false;
        bool has_shipping_estimate = false;
    } cart;

    struct Search {
        std::string trigger = "icon_button";
        bool has_predictive = true;
        std::vector<std::string> predictive_types;
        std::string results_layout = "fullpage";
    } search;

    struct Intl {
        std::optional<bool> has_locale_switcher;
        std::optional<bool> has_currency_switcher;
    } intl;

    struct Floating {
        bool has_chat_widget = false;
        bool has_age_gate = false;
        bool has_cookie_banner = false;
        bool has_newsletter_popup = false;
    } floating;

    std::vector<std::string> info_pages_present;

    /// Declared sort list mapped to canonical keys; throws CapabilityError on unknown entries.
    std::vector<SortKey> sort_keys() const;
    bool has_filter(std::string_view name) const;
};

// ---------------------------------------------------------------------------
// Statistics document

struct ShopStats {
    std::int64_t products_total = 0;
    std::int64_t collections_total = 0;
    struct PerCollection {
        double avg = 0.0;
        double median = 0.0;
        std::int64_t max = 0;
        bool operator==(const PerCollection&) const = default;
    } products_per_collection;
    struct Price {
        Money min;
        Money max;
        Money median;
        std::string currency;
        bool operator==(const Price&) const = default;
    };
    std::optional<Price> price;
    double products_with_variants_pct = 0.0;
    std::vector<std::string> variant_axes_observed;
    std::int64_t navigation_depth_max = 0;
    std::int64_t homepage_section_count = 0;
    std::int64_t info_pages_count = 0;
    /// Exploration bookkeeping carried through unchanged; never recomputed.
    std::optional<std::int64_t> feature_count;

    bool operator==(const ShopStats&) const = default;
};

/// Names of the fields on which two stats documents disagree (feature_count ignored).
std::vector<std::string> stats_differences(const ShopStats& declared, const ShopStats& computed);

// ---------------------------------------------------------------------------
// Option index

/// dimension -> (value -> number of distinct products in the collection realizing the pair).
using OptionIndex = std::map<std::string, std::map<std::string, int>>;

/// A (dimension, value) filter pair such as Color=Black.
struct Facet {
    std::string dimension;
    std::string value;
    bool operator==(const Facet&) const = default;
};

inline constexpr std::string_view kBrandDimension = "Brand";
inline constexpr std::string_view kTypeDimension = "Type";

/// Case-insensitive lookup; 0 when the dimension or value is absent.
int facet_count(const OptionIndex& index, std::string_view dimension, std::string_view value);

/// True when the product realizes (dimension, value): Brand/Type compare against
/// vendor/product_type, anything else against variant options.
bool product_realizes(const Product& product, std::string_view dimension, std::string_view value);

/// True when some product realizes a value for this dimension at all.
bool product_has_dimension(const Product& product, std::string_view dimension);

// ---------------------------------------------------------------------------
// Bundle

class ShopBundle {
public:
    ShopBundle() = default;
    ShopBundle(std::string shop_slug, std::vector<Product> products, std::vector<Collection> collections,
               std::vector<PageDoc> pages, Capabilities capabilities, ShopStats stats);

    const std::string& shop_slug() const { return shop_slug_; }
    const std::vector<Product>& products() const { return products_; }
    const std::vector<Collection>& collections() const { return collections_; }
    const std::vector<PageDoc>& pages() const { return pages_; }
    const Capabilities& capabilities() const { return capabilities_; }
    const ShopStats& stats() const { return stats_; }

    const Product* find_product(std::string_view handle) const;
    const Collection* find_collection(std::string_view handle) const;
    const PageDoc* find_page(PageKind kind, std::string_view handle) const;
    /// Matches either kind.
    const PageDoc* find_any_page(std::string_view handle) const;

    struct VariantRef {
        const Product* product = nullptr;
        const Variant* variant = nullptr;
    };
    std::optional<VariantRef> find_variant(std::string_view id) const;

    /// Products of a collection in collection order.
    std::vector<const Product*> collection_products(const Collection& collection) const;
    /// Collections containing the product, in bundle order.
    std::vector<const Collection*> collections_containing(std::string_view product_handle) const;

    /// Precomputed per-collection option index.
    const OptionIndex& option_index(std::string_view collection_handle) const;

    /// Every dimension name that appears on any product axis, in first-seen order.
    std::vector<std::string> dimension_vocabulary() const;

    /// Runs every referential and capability check; throws IntegrityError/CapabilityError.
    void verify() const;

    void set_stats(ShopStats stats) { stats_ = std::move(stats); }

private:
    void reindex();

    std::string shop_slug_;
    std::vector<Product> products_;
    std::vector<Collection> collections_;
    std::vector<PageDoc> pages_;
    Capabilities capabilities_;
    ShopStats stats_;

    std::unordered_map<std::string, std::size_t> product_by_handle_;
    std::unordered_map<std::string, std::size_t> collection_by_handle_;
    std::unordered_map<std::string, std::size_t> custom_page_by_handle_;
    std::unordered_map<std::string, std::size_t> policy_by_handle_;
    std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> variant_by_id_;
    std::unordered_map<std::string, OptionIndex> option_indexes_;
};

// ---------------------------------------------------------------------------
// Operations

/// Reads products.json, collections.json, pages.json, capabilities.json and stats.json.
/// The shop slug defaults to the directory name.
ShopBundle load_shop_bundle(const std::filesystem::path& directory, std::optional<std::string> shop_slug = {});

/// Writes the five documents. The directory is created if needed.
void save_shop_bundle(const ShopBundle& bundle, const std::filesystem::path& directory);

OptionIndex build_option_index(const Collection& collection, const ShopBundle& bundle);

ShopStats compute_stats(const ShopBundle& bundle);

inline const std::vector<std::string>& default_generic_collections() {
    static const std::vector<std::string> handles{"all", "sale", "featured", "best-sellers"};
    return handles;
}

bool is_generic_collection(std::string_view handle,
                           const std::vector<std::string>& generic = default_generic_collections());

/// Active, non-gift-card products with an available variant; one per product_type,
/// keeping the lexicographically smallest handle. Sorted by handle.
std::vector<const Product*> eligible_discovery_products(const ShopBundle& bundle);

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const Variant& v);
void to_json(nlohmann::json& j, const Product& p);
void to_json(nlohmann::json& j, const Collection& c);
void to_json(nlohmann::json& j, const PageDoc& p);
void to_json(nlohmann::json& j, const Capabilities& c);
void to_json(nlohmann::json& j, const ShopStats& s);

Product product_from_json(const nlohmann::json& j);
Collection collection_from_json(const nlohmann::json& j);
PageDoc page_from_json(const nlohmann::json& j);
Capabilities capabilities_from_json(const nlohmann::json& j);
ShopStats stats_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Small string helpers shared across modules.

std::string to_lower(std::string_view text);
bool iequals(std::string_view a, std::string_view b);
/// Case-insensitive substring test.
bool icontains(std::string_view haystack, std::string_view needle);
bool is_valid_handle(std::string_view handle);
/// Lowercases and replaces runs of non-alphanumerics with '-'.
std::string slugify(std::string_view text);

}  // namespace storebench
