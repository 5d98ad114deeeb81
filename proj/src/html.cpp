#include "storebench/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace storebench {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.';
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

class Parser {
public:
    Parser(std::string_view src, HtmlMode mode) : src_(src), strict_(mode == HtmlMode::strict) {
        root_.tag = "#document";
        stack_.push_back(&root_);
    }

    HtmlNode run() {
        while (pos_ < src_.size()) {
            if (src_[pos_] == '<') {
                tag();
            } else {
                text();
            }
        }
        if (stack_.size() > 1) {
            if (strict_) fail(src_.size(), "unclosed <" + stack_.back()->tag + ">");
            stack_.resize(1);
        }
        if (strict_) {
            const auto roots = std::count_if(root_.children.begin(), root_.children.end(),
                                             [](const HtmlNode& n) { return n.is_element(); });
            if (roots == 0) fail(0, "document has no root element");
        }
        return std::move(root_);
    }

private:
    [[noreturn]] void fail(std::size_t at, const std::string& what) { throw HtmlParseError(at, what); }

    bool starts_with_ci(std::size_t at, std::string_view s) const {
        if (at + s.size() > src_.size()) return false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (std::tolower(static_cast<unsigned char>(src_[at + i])) != s[i]) return false;
        }
        return true;
    }

    HtmlNode& top() { return *stack_.back(); }

    void add_text(std::string decoded, std::size_t at) {
        if (stack_.size() == 1) {
            const bool blank = std::all_of(decoded.begin(), decoded.end(), is_space);
            if (blank) return;
            if (strict_) fail(at, "text outside the root element");
        }
        if (!top().children.empty() && top().children.back().is_text()) {
            top().children.back().text += decoded;
            return;
        }
        HtmlNode node;
        node.tag = "#text";
        node.text = std::move(decoded);
        top().children.push_back(std::move(node));
    }

    void text() {
        const std::size_t start = pos_;
        const auto next = src_.find('<', pos_);
        pos_ = next == std::string_view::npos ? src_.size() : next;
        add_text(decode_entities(src_.substr(start, pos_ - start)), start);
    }

    void tag() {
        const std::size_t start = pos_;
        if (src_.compare(pos_, 4, "<!--") == 0) {
            const auto end = src_.find("-->", pos_ + 4);
            if (end == std::string_view::npos) {
                if (strict_) fail(start, "unterminated comment");
                pos_ = src_.size();
                return;
            }
            pos_ = end + 3;
            return;
        }
        if (pos_ + 1 < src_.size() && (src_[pos_ + 1] == '!' || src_[pos_ + 1] == '?')) {
            const auto end = src_.find('>', pos_);
            if (end == std::string_view::npos) {
                if (strict_) fail(start, "unterminated declaration");
                pos_ = src_.size();
                return;
            }
            pos_ = end + 1;
            return;
        }
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
            end_tag();
            return;
        }
        if (pos_ + 1 >= src_.size() || !std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]))) {
            if (strict_) fail(start, "stray '<'");
            ++pos_;
            add_text("<", start);
            return;
        }
        start_tag();
    }

    void start_tag() {
        const std::size_t start = pos_;
        ++pos_;
        const std::size_t name_start = pos_;
        while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
        HtmlNode node;
        node.tag = lower(src_.substr(name_start, pos_ - name_start));
        bool self_closing = false;
        while (true) {
            while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
            if (pos_ >= src_.size()) {
                if (strict_) fail(start, "unterminated <" + node.tag + "> tag");
                return;
            }
            if (src_[pos_] == '>') {
                ++pos_;
                break;
            }
            if (src_.compare(pos_, 2, "/>") == 0) {
                pos_ += 2;
                self_closing = true;
                break;
            }
            if (src_[pos_] == '/') {
                ++pos_;
                continue;
            }
            attribute(node, start);
        }
        if (stack_.size() == 1 && strict_) {
            const bool have_root = std::any_of(root_.children.begin(), root_.children.end(),
                                               [](const HtmlNode& n) { return n.is_element(); });
            if (have_root) fail(start, "second root element <" + node.tag + ">");
        }
        const std::string tag_name = node.tag;
        top().children.push_back(std::move(node));
        if (self_closing || is_void_element(tag_name)) return;
        stack_.push_back(&top().children.back());
        if (tag_name == "script" || tag_name == "style") raw_text(tag_name);
    }

    void attribute(HtmlNode& node, std::size_t tag_start) {
        const std::size_t name_start = pos_;
        while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '=' && src_[pos_] != '>' &&
               src_.compare(pos_, 2, "/>") != 0) {
            if (strict_ && (src_[pos_] == '"' || src_[pos_] == '\'' || src_[pos_] == '<')) {
                fail(pos_, "unexpected character in attribute name");
            }
            ++pos_;
        }
        std::string name = lower(src_.substr(name_start, pos_ - name_start));
        if (name.empty()) {
            if (strict_) fail(pos_, "empty attribute name");
            ++pos_;
            return;
        }
        while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
        std::string value;
        if (pos_ < src_.size() && src_[pos_] == '=') {
            ++pos_;
            while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
                const char quote = src_[pos_];
                const auto end = src_.find(quote, pos_ + 1);
                if (end == std::string_view::npos) {
                    if (strict_) fail(tag_start, "unterminated attribute value");
                    pos_ = src_.size();
                    return;
                }
                value = decode_entities(src_.substr(pos_ + 1, end - pos_ - 1));
                pos_ = end + 1;
            } else {
                const std::size_t value_start = pos_;
                while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>') ++pos_;
                value = decode_entities(src_.substr(value_start, pos_ - value_start));
            }
        }
        if (!node.has_attr(name)) node.attributes.emplace_back(std::move(name), std::move(value));
    }

    void raw_text(const std::string& tag_name) {
        const std::string closing = "</" + tag_name;
        std::size_t search = pos_;
        while (true) {
            const auto at = src_.find("</", search);
            if (at == std::string_view::npos) {
                if (strict_) fail(pos_, "unterminated <" + tag_name + ">");
                pos_ = src_.size();
                return;
            }
            if (starts_with_ci(at, closing)) {
                if (at > pos_) {
                    HtmlNode node;
                    node.tag = "#text";
                    node.text = std::string(src_.substr(pos_, at - pos_));
                    top().children.push_back(std::move(node));
                }
                pos_ = at;
                return;
            }
            search = at + 2;
        }
    }

    void end_tag() {
        const std::size_t start = pos_;
        pos_ += 2;
        const std::size_t name_start = pos_;
        while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
        const std::string name = lower(src_.substr(name_start, pos_ - name_start));
        while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
        if (pos_ >= src_.size() || src_[pos_] != '>') {
            if (strict_) fail(start, "malformed end tag");
            const auto end = src_.find('>', pos_);
            pos_ = end == std::string_view::npos ? src_.size() : end + 1;
        } else {
            ++pos_;
        }
        if (is_void_element(name)) {
            if (strict_) fail(start, "end tag for void element </" + name + ">");
            return;
        }
        if (top().tag == name && stack_.size() > 1) {
            stack_.pop_back();
            return;
        }
        if (strict_) {
            if (stack_.size() == 1) fail(start, "unexpected end tag </" + name + ">");
            fail(start, "end tag </" + name + "> does not match <" + top().tag + ">");
        }
        for (std::size_t i = stack_.size(); i-- > 1;) {
            if (stack_[i]->tag == name) {
                stack_.resize(i);
                return;
            }
        }
    }

    std::string_view src_;
    bool strict_;
    std::size_t pos_ = 0;
    HtmlNode root_;
    std::vector<HtmlNode*> stack_;
};

void collect_text(const HtmlNode& node, std::string& out) {
    if (node.is_text()) {
        out += node.text;
        out += ' ';
        return;
    }
    if (node.tag == "script" || node.tag == "style") return;
    for (const auto& child : node.children) collect_text(child, out);
}

void walk_impl(const HtmlNode& node, std::vector<const HtmlNode*>& ancestors,
               const std::function<void(const HtmlNode&, const std::vector<const HtmlNode*>&)>& visit) {
    const bool element = node.is_element();
    if (element) {
        visit(node, ancestors);
        ancestors.push_back(&node);
    }
    for (const auto& child : node.children) {
        if (child.is_element()) walk_impl(child, ancestors, visit);
    }
    if (element) ancestors.pop_back();
}

}  // namespace

const std::string* HtmlNode::attr(std::string_view name) const {
    for (const auto& [key, value] : attributes) {
        if (key == name) return &value;
    }
    return nullptr;
}

std::string HtmlNode::attr_or(std::string_view name, std::string fallback) const {
    const auto* value = attr(name);
    return value ? *value : std::move(fallback);
}

std::string HtmlNode::text_content() const {
    std::string raw;
    collect_text(*this, raw);
    std::string out;
    bool pending_space = false;
    for (char c : raw) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

HtmlNode parse_html(std::string_view document, HtmlMode mode) { return Parser(document, mode).run(); }

bool is_void_element(std::string_view tag) {
    static constexpr std::array<std::string_view, 14> kVoid{"area", "base",  "br",   "col",   "embed",
                                                            "hr",   "img",   "input", "link", "meta",
                                                            "param", "source", "track", "wbr"};
    return std::find(kVoid.begin(), kVoid.end(), tag) != kVoid.end();
}

std::string escape_html(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '&') {
            out += text[i];
            continue;
        }
        const auto semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += '&';
            continue;
        }
        const std::string_view name = text.substr(i + 1, semi - i - 1);
        if (!name.empty() && name[0] == '#') {
            unsigned long cp = 0;
            bool ok = name.size() > 1;
            const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
            for (std::size_t k = hex ? 2 : 1; k < name.size() && ok; ++k) {
                const char c = name[k];
                if (hex && std::isxdigit(static_cast<unsigned char>(c))) {
                    cp = cp * 16 + static_cast<unsigned long>(std::isdigit(static_cast<unsigned char>(c))
                                                                  ? c - '0'
                                                                  : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
                } else if (!hex && std::isdigit(static_cast<unsigned char>(c))) {
                    cp = cp * 10 + static_cast<unsigned long>(c - '0');
                } else {
                    ok = false;
                }
                if (cp > 0x10FFFF) ok = false;
            }
            if (hex && name.size() == 2) ok = false;
            if (ok) {
                append_utf8(out, cp);
                i = semi;
                continue;
            }
        } else if (name == "amp") {
            out += '&';
            i = semi;
            continue;
        } else if (name == "lt") {
            out += '<';
            i = semi;
            continue;
        } else if (name == "gt") {
            out += '>';
            i = semi;
            continue;
        } else if (name == "quot") {
            out += '"';
            i = semi;
            continue;
        } else if (name == "apos") {
            out += '\'';
            i = semi;
            continue;
        } else if (name == "nbsp") {
            append_utf8(out, 0xA0);
            i = semi;
            continue;
        }
        out += '&';
    }
    return out;
}

void walk_elements(const HtmlNode& root, const std::function<void(const HtmlNode&)>& visit) {
    walk_elements_with_ancestors(root, [&](const HtmlNode& node, const std::vector<const HtmlNode*>&) { visit(node); });
}

void walk_elements_with_ancestors(
    const HtmlNode& root, const std::function<void(const HtmlNode&, const std::vector<const HtmlNode*>&)>& visit) {
    std::vector<const HtmlNode*> ancestors;
    walk_impl(root, ancestors, visit);
}

std::vector<const HtmlNode*> find_elements(const HtmlNode& root, const std::function<bool(const HtmlNode&)>& pred) {
    std::vector<const HtmlNode*> out;
    walk_elements(root, [&](const HtmlNode& node) {
        if (pred(node)) out.push_back(&node);
    });
    return out;
}

}  // namespace storebench
