#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace storebench {

class HtmlParseError : public std::runtime_error {
public:
    HtmlParseError(std::size_t offset, const std::string& detail)
        : std::runtime_error("html parse error at offset " + std::to_string(offset) + ": " + detail),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Element or text node. Text nodes have tag "#text"; the parse root has tag "#document".
struct HtmlNode {
    std::string tag;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string text;
    std::vector<HtmlNode> children;

    bool is_text() const { return tag == "#text"; }
    bool is_element() const { return !tag.empty() && tag[0] != '#'; }
    const std::string* attr(std::string_view name) const;
    bool has_attr(std::string_view name) const { return attr(name) != nullptr; }
    std::string attr_or(std::string_view name, std::string fallback = {}) const;
    /// Concatenated descendant text, whitespace runs collapsed and trimmed.
    std::string text_content() const;
};

enum class HtmlMode {
    /// Mismatched or unclosed tags, stray text at top level and multiple roots are errors.
    strict,
    /// Recovers from mismatched tags the way browsers roughly do; never throws.
    lenient,
};

HtmlNode parse_html(std::string_view document, HtmlMode mode = HtmlMode::strict);

bool is_void_element(std::string_view tag);

std::string escape_html(std::string_view text);
std::string decode_entities(std::string_view text);

/// Pre-order walk over element nodes (the root itself included when it is an element).
void walk_elements(const HtmlNode& root, const std::function<void(const HtmlNode&)>& visit);

/// Pre-order walk that also passes the chain of element ancestors (outermost first).
void walk_elements_with_ancestors(
    const HtmlNode& root, const std::function<void(const HtmlNode&, const std::vector<const HtmlNode*>&)>& visit);

std::vector<const HtmlNode*> find_elements(const HtmlNode& root, const std::function<bool(const HtmlNode&)>& pred);

}  // namespace storebench
