#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "storebench/catalog.hpp"

namespace storebench {

// ---------------------------------------------------------------------------
// Listings

inline constexpr std::size_t kListingPageSize = 24;

struct ListingQuery {
    bool available = false;
    bool on_sale = false;
    std::optional<Facet> facet;
    SortKey sort = SortKey::featured;
    std::size_t loaded = 0;
};

/// Conjunctive filter; preserves input order. An unknown facet dimension matches nothing.
std::vector<const Product*> apply_filters(const std::vector<const Product*>& products, const ListingQuery& query);

/// Stable sort by the given key.
std::vector<const Product*> apply_sort(const std::vector<const Product*>& products, SortKey key);

struct PageSlice {
    std::vector<const Product*> items;
    bool has_more = false;
};

/// Two-stage load-more: loaded=0 gives the first page, loaded=24 the remainder.
/// Throws std::invalid_argument for any other value.
PageSlice paginate(const std::vector<const Product*>& products, std::size_t loaded);

/// Active products whose title, tags, vendor or product_type contain q (case-insensitive).
/// An exact title match ranks first; the rest keep bundle order. Empty q matches nothing.
std::vector<const Product*> search_products(const ShopBundle& bundle, std::string_view q);

/// Predictive-search payload for the top matches.
nlohmann::json suggest_json(const ShopBundle& bundle, std::string_view q, std::size_t limit = 10);

// ---------------------------------------------------------------------------
// Cart

struct CartLine {
    std::string variant_id;
    std::string product_handle;
    std::string title;
    std::int64_t quantity = 0;
    Money unit_price;
    std::optional<Money> compare_at_price;

    Money line_total() const { return unit_price * quantity; }
    bool operator==(const CartLine&) const = default;
};

struct CartState {
    std::string session_id;
    std::vector<CartLine> lines;
    Money subtotal;
    Money savings;

    std::int64_t item_count() const;
    const CartLine* find(std::string_view variant_id) const;
    bool operator==(const CartState&) const = default;
};

/// Cart mutation rejected. status() is the HTTP status the route answers with.
class CartError : public std::runtime_error {
public:
    CartError(int status, const std::string& detail) : std::runtime_error(detail), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

/// Merges into an existing line. Unknown variant: 404; unavailable or inactive: 422; qty < 0: 400.
void cart_add(CartState& cart, const ShopBundle& bundle, std::string_view variant_id, std::int64_t quantity);
/// qty 0 removes the line; a variant not yet in the cart is added.
void cart_set_quantity(CartState& cart, const ShopBundle& bundle, std::string_view variant_id, std::int64_t quantity);
/// Removing an absent line is a no-op.
void cart_remove(CartState& cart, std::string_view variant_id);
void recompute_totals(CartState& cart);

void to_json(nlohmann::json& j, const CartLine& line);
void to_json(nlohmann::json& j, const CartState& cart);
CartState cart_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// HTTP-independent request handling

struct Request {
    std::string method = "GET";
    /// Path plus optional query string.
    std::string target = "/";
    std::string body;
    std::string content_type;
    /// Value of the session cookie, empty when absent.
    std::string session;
};

struct Response {
    int status = 200;
    std::string content_type = "text/html; charset=utf-8";
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;

    const std::string* header(std::string_view name) const;
};

inline constexpr std::string_view kSessionCookie = "sg_session";

/// UI surfaces the markup exposes through data-sg-surface / data-sg-toggle.
inline constexpr std::string_view kSurfaceNames[] = {"navigation", "cart_drawer", "search", "filter_panel", "sort"};

struct StorefrontOptions {
    std::uint64_t seed = 0;
};

class Storefront {
public:
    explicit Storefront(ShopBundle bundle, StorefrontOptions options = {});

    Response handle(const Request& request);

    /// Session-scoped or global reset. Global reset also rewinds session-token minting.
    void reset_all();
    void reset_session(const std::string& session);

    /// Copy of a session's cart; empty cart for unknown sessions.
    CartState cart(const std::string& session) const;

    const ShopBundle& bundle() const { return bundle_; }

private:
    struct Session {
        std::mutex mutex;
        CartState cart;
    };

    std::shared_ptr<Session> find_session(const std::string& id) const;
    std::pair<std::shared_ptr<Session>, std::string> session_for(const std::string& id);
    std::string mint_token();

    Response route_get(const Request& request, const std::string& path, const std::string& query);
    Response route_post(const Request& request, const std::string& path, const std::string& query);
    Response cart_mutation(const Request& request, const std::string& action);

    ShopBundle bundle_;
    StorefrontOptions options_;

    mutable std::shared_mutex sessions_mutex_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
    std::mutex token_mutex_;
    std::mt19937_64 token_rng_;
    std::uint64_t token_counter_ = 0;
};

}  // namespace storebench
