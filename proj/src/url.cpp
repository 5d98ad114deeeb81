#include "storebench/url.hpp"

#include <cctype>
#include <stdexcept>

namespace storebench {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string remove_dot_segments(std::string_view path) {
    std::vector<std::string> segments;
    std::size_t i = 0;
    while (i <= path.size()) {
        const auto slash = path.find('/', i);
        const auto end = slash == std::string_view::npos ? path.size() : slash;
        const std::string_view seg = path.substr(i, end - i);
        if (seg == "..") {
            if (!segments.empty()) segments.pop_back();
        } else if (seg != "." && !(seg.empty() && end != path.size())) {
            segments.emplace_back(seg);
        }
        if (slash == std::string_view::npos) break;
        i = slash + 1;
    }
    std::string out;
    for (const auto& seg : segments) {
        out += '/';
        out += seg;
    }
    if (out.empty()) out = "/";
    return out;
}

}  // namespace

std::string url_decode(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '+') {
            out += ' ';
        } else if (c == '%' && i + 2 < text.size() && hex_value(text[i + 1]) >= 0 && hex_value(text[i + 2]) >= 0) {
            out += static_cast<char>(hex_value(text[i + 1]) * 16 + hex_value(text[i + 2]));
            i += 2;
        } else {
            out += c;
        }
    }
    return out;
}

std::string url_encode(std::string_view text) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 15];
        }
    }
    return out;
}

QueryParams parse_query(std::string_view query) {
    QueryParams params;
    std::size_t i = 0;
    while (i < query.size()) {
        auto amp = query.find('&', i);
        if (amp == std::string_view::npos) amp = query.size();
        const std::string_view pair = query.substr(i, amp - i);
        if (!pair.empty()) {
            const auto eq = pair.find('=');
            if (eq == std::string_view::npos) {
                params.emplace_back(url_decode(pair), "");
            } else {
                params.emplace_back(url_decode(pair.substr(0, eq)), url_decode(pair.substr(eq + 1)));
            }
        }
        i = amp + 1;
    }
    return params;
}

std::string build_query(const QueryParams& params) {
    std::string out;
    for (const auto& [key, value] : params) {
        if (!out.empty()) out += '&';
        out += url_encode(key);
        out += '=';
        out += url_encode(value);
    }
    return out;
}

std::optional<std::string> query_value(const QueryParams& params, std::string_view key) {
    for (const auto& [k, v] : params) {
        if (k == key) return v;
    }
    return std::nullopt;
}

Target split_target(std::string_view target) {
    const auto hash = target.find('#');
    if (hash != std::string_view::npos) target = target.substr(0, hash);
    const auto q = target.find('?');
    if (q == std::string_view::npos) return {std::string(target), {}};
    return {std::string(target.substr(0, q)), std::string(target.substr(q + 1))};
}

std::string Origin::to_string() const {
    std::string out = scheme + "://" + host;
    if (!((scheme == "http" && port == 80) || (scheme == "https" && port == 443))) {
        out += ':' + std::to_string(port);
    }
    return out;
}

Origin parse_origin(std::string_view url) {
    Origin origin;
    std::string_view rest;
    if (url.rfind("http://", 0) == 0) {
        rest = url.substr(7);
    } else if (url.rfind("https://", 0) == 0) {
        origin.scheme = "https";
        origin.port = 443;
        rest = url.substr(8);
    } else {
        throw std::invalid_argument("expected an http:// or https:// url: " + std::string(url));
    }
    const auto slash = rest.find('/');
    const std::string_view authority = rest.substr(0, slash);
    if (slash != std::string_view::npos) origin.base_path = std::string(rest.substr(slash));
    const auto colon = authority.rfind(':');
    if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
        origin.host = std::string(authority.substr(0, colon));
        const std::string port(authority.substr(colon + 1));
        try {
            origin.port = std::stoi(port);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad port in url: " + std::string(url));
        }
    } else {
        origin.host = std::string(authority);
    }
    if (origin.host.empty()) throw std::invalid_argument("missing host in url: " + std::string(url));
    return origin;
}

std::optional<std::string> resolve_href(const Origin& origin, std::string_view current_path, std::string_view href) {
    while (!href.empty() && std::isspace(static_cast<unsigned char>(href.front()))) href.remove_prefix(1);
    while (!href.empty() && std::isspace(static_cast<unsigned char>(href.back()))) href.remove_suffix(1);
    if (href.empty() || href.front() == '#') return std::nullopt;
    std::string target;
    if (href.rfind("http://", 0) == 0 || href.rfind("https://", 0) == 0) {
        Origin other;
        try {
            other = parse_origin(href);
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
        if (other.scheme != origin.scheme || other.host != origin.host || other.port != origin.port) {
            return std::nullopt;
        }
        const auto scheme_end = href.find("//") + 2;
        const auto slash = href.find('/', scheme_end);
        target = slash == std::string_view::npos ? "/" : std::string(href.substr(slash));
    } else if (href.rfind("//", 0) == 0) {
        return std::nullopt;
    } else if (href.front() == '/') {
        target = std::string(href);
    } else if (href.front() == '?') {
        target = std::string(current_path) + std::string(href);
    } else {
        const auto colon = href.find(':');
        const auto first_sep = href.find_first_of("/?#");
        if (colon != std::string_view::npos && (first_sep == std::string_view::npos || colon < first_sep)) {
            return std::nullopt;  // mailto:, javascript:, tel:
        }
        const auto dir_end = current_path.rfind('/');
        target = std::string(current_path.substr(0, dir_end + 1)) + std::string(href);
    }
    auto [path, query] = split_target(target);
    std::string out = remove_dot_segments(path);
    if (!query.empty()) out += "?" + query;
    return out;
}

}  // namespace storebench
