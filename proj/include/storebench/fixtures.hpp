#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "storebench/catalog.hpp"

namespace storebench {

/// Builds a bundle and fills in stats by recomputation, then verifies it.
ShopBundle make_bundle(std::string shop_slug, std::vector<Product> products, std::vector<Collection> collections,
                       std::vector<PageDoc> pages, Capabilities capabilities);

/// Capability document used by the bundled shops: load-more pagination, drawer cart,
/// predictive search, eight sort keys and the two checkbox facets.
Capabilities default_capabilities(std::string descriptor, std::string category);

/// Names accepted by fixture_shop().
std::vector<std::string> fixture_names();

/// One of the bundled sandbox shops ("mock_cookware", "mock_clothing", "tiny").
/// Throws std::invalid_argument for unknown names.
ShopBundle fixture_shop(std::string_view name);

/// A random but valid bundle for property tests. Same seed, same bundle.
ShopBundle random_bundle(std::uint64_t seed);

/// Convenience constructor for a single-variant product.
Product simple_product(std::string handle, std::string title, std::string vendor, std::string product_type,
                       Money price, std::int64_t created_ordinal);

}  // namespace storebench
