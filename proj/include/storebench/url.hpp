#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace storebench {

using QueryParams = std::vector<std::pair<std::string, std::string>>;

/// Percent-decoding; '+' becomes a space (form and query semantics).
std::string url_decode(std::string_view text);
/// Percent-encodes everything outside the unreserved set.
std::string url_encode(std::string_view text);

QueryParams parse_query(std::string_view query);
std::string build_query(const QueryParams& params);
/// First value for a key, if any.
std::optional<std::string> query_value(const QueryParams& params, std::string_view key);

struct Target {
    std::string path;
    std::string query;
};
/// Splits "/a/b?x=1#frag" into path and query; the fragment is dropped.
Target split_target(std::string_view target);

struct Origin {
    std::string scheme = "http";
    std::string host;
    int port = 80;
    std::string base_path = "/";

    std::string to_string() const;
    bool operator==(const Origin&) const = default;
};

/// Parses "http://host[:port][/path]". Throws std::invalid_argument on anything else.
Origin parse_origin(std::string_view url);

/// Resolves an href found on `current_path` to a same-origin target ("/path?query"),
/// or nullopt for other origins, fragments-only links and non-http schemes.
std::optional<std::string> resolve_href(const Origin& origin, std::string_view current_path, std::string_view href);

}  // namespace storebench
