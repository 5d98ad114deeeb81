#include "storebench/browser.hpp"

#include <httplib.h>

#include <algorithm>

#include "storebench/catalog.hpp"

namespace storebench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Transports

namespace {

class StorefrontTransport : public Transport {
public:
    explicit StorefrontTransport(Storefront& storefront) : storefront_(storefront) {}
    Response send(const Request& request) override { return storefront_.handle(request); }

private:
    Storefront& storefront_;
};

class HttpTransport : public Transport {
public:
    explicit HttpTransport(const std::string& base_url) : origin_(parse_origin(base_url)) {
        client_ = std::make_unique<httplib::Client>(origin_.scheme + "://" + origin_.host + ":" + std::to_string(origin_.port));
        client_->set_connection_timeout(5);
        client_->set_read_timeout(30);
    }

    Response send(const Request& request) override {
        httplib::Headers headers;
        if (!request.session.empty()) headers.emplace("Cookie", std::string(kSessionCookie) + "=" + request.session);
        httplib::Result res = request.method == "POST"
                                  ? client_->Post(request.target, headers, request.body,
                                                  request.content_type.empty() ? "application/x-www-form-urlencoded"
                                                                               : request.content_type)
                                  : client_->Get(request.target, headers);
        if (!res) throw TransportError("cannot reach " + origin_.to_string() + ": " + httplib::to_string(res.error()));
        Response out;
        out.status = res->status;
        out.body = res->body;
        out.content_type = res->get_header_value("Content-Type");
        for (const auto& [name, value] : res->headers) {
            if (name != "Content-Type") out.headers.emplace_back(name, value);
        }
        return out;
    }

private:
    Origin origin_;
    std::unique_ptr<httplib::Client> client_;
};

}  // namespace

std::unique_ptr<Transport> make_storefront_transport(Storefront& storefront) {
    return std::make_unique<StorefrontTransport>(storefront);
}

std::unique_ptr<Transport> make_http_transport(const std::string& base_url) {
    try {
        return std::make_unique<HttpTransport>(base_url);
    } catch (const std::invalid_argument& e) {
        throw TransportError(std::string("bad environment url: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Overlay

namespace {

bool in_overlay(const HtmlNode& node) {
    if (node.tag == "a") return node.has_attr("href");
    if (node.tag == "input") return to_lower(node.attr_or("type", "text")) != "hidden";
    return node.tag == "button" || node.tag == "select" || node.tag == "textarea" || node.tag == "summary";
}

}  // namespace

std::vector<const HtmlNode*> overlay_elements(const HtmlNode& document) {
    return find_elements(document, in_overlay);
}

std::string overlay_id(std::size_t index) { return "elem-" + std::to_string(index + 1); }

void to_json(json& j, const ElementRef& e) {
    json attrs = json::object();
    for (const auto& [k, v] : e.attributes) attrs[k] = v;
    j = json{{"id", e.id}, {"tag", e.tag}, {"text", e.text}, {"attributes", attrs}};
}

void to_json(json& j, const Observation& o) {
    j = json{{"url", o.url}, {"status", o.status}, {"html", o.html},
             {"elements", o.elements}, {"step", o.step}, {"memory", o.memory}};
}

// ---------------------------------------------------------------------------
// Browser

Browser::Browser(Transport& transport) : transport_(transport) { document_.tag = "#document"; }

std::string Browser::load(Request request, bool push_history) {
    Response response;
    for (int hops = 0;; ++hops) {
        request.session = session_;
        response = transport_.send(request);
        for (const auto& [name, value] : response.headers) {
            if (!iequals(name, "Set-Cookie")) continue;
            const std::string prefix = std::string(kSessionCookie) + "=";
            if (value.rfind(prefix, 0) == 0) session_ = value.substr(prefix.size(), value.find(';') - prefix.size());
        }
        const std::string* location = response.header("Location");
        if (response.status >= 300 && response.status < 400 && location && hops < 5) {
            auto resolved = resolve_href(origin_, split_target(request.target).path, *location);
            if (!resolved) break;
            request = Request{"GET", *resolved, {}, {}, {}};
            continue;
        }
        break;
    }
    if (push_history && !current_.empty()) history_.push_back(current_);
    current_ = request.target;
    status_ = response.status;
    body_ = std::move(response.body);
    visited_.push_back(current_);
    document_ = body_.find('<') != std::string::npos ? parse_html(body_, HtmlMode::lenient) : HtmlNode{"#document", {}, {}, {}};
    elements_ = overlay_elements(document_);
    parents_.clear();
    walk_elements_with_ancestors(document_, [&](const HtmlNode& node, const std::vector<const HtmlNode*>& ancestors) {
        if (!ancestors.empty()) parents_[&node] = ancestors.back();
    });
    values_.clear();
    checked_.clear();
    return "loaded " + current_ + " (" + std::to_string(status_) + ")";
}

std::string Browser::goto_url(const std::string& target) {
    auto resolved = resolve_href(origin_, split_target(current_.empty() ? "/" : current_).path, target);
    if (!resolved) return "blocked: not a same-origin url";
    return load(Request{"GET", *resolved, {}, {}, {}}, true);
}

const HtmlNode* Browser::element(const std::string& id) const {
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (overlay_id(i) == id) return elements_[i];
    }
    return nullptr;
}

const HtmlNode* Browser::form_of(const HtmlNode* node) const {
    for (auto it = parents_.find(node); it != parents_.end(); it = parents_.find(it->second)) {
        if (it->second->tag == "form") return it->second;
    }
    return nullptr;
}

bool Browser::is_checked(const HtmlNode& node) const {
    auto it = checked_.find(&node);
    return it != checked_.end() ? it->second : node.has_attr("checked");
}

std::string Browser::submit(const HtmlNode& form, const HtmlNode* submitter) {
    QueryParams params;
    walk_elements(form, [&](const HtmlNode& node) {
        const std::string* name = node.attr("name");
        if (!name || name->empty() || node.has_attr("disabled")) return;
        if (node.tag == "input") {
            const std::string type = to_lower(node.attr_or("type", "text"));
            if (type == "submit" || type == "button" || type == "image" || type == "reset") {
                if (&node == submitter) params.emplace_back(*name, node.attr_or("value"));
                return;
            }
            if (type == "checkbox" || type == "radio") {
                if (is_checked(node)) params.emplace_back(*name, node.attr_or("value", "on"));
                return;
            }
            auto it = values_.find(&node);
            params.emplace_back(*name, it != values_.end() ? it->second : node.attr_or("value"));
        } else if (node.tag == "textarea") {
            auto it = values_.find(&node);
            params.emplace_back(*name, it != values_.end() ? it->second : node.text_content());
        } else if (node.tag == "select") {
            auto it = values_.find(&node);
            if (it != values_.end()) {
                params.emplace_back(*name, it->second);
                return;
            }
            const auto options = find_elements(node, [](const HtmlNode& n) { return n.tag == "option"; });
            const HtmlNode* chosen = nullptr;
            for (const HtmlNode* o : options) {
                if (o->has_attr("selected")) {
                    chosen = o;
                    break;
                }
            }
            if (!chosen && !options.empty()) chosen = options.front();
            if (chosen) params.emplace_back(*name, chosen->attr_or("value", chosen->text_content()));
        } else if (node.tag == "button" && &node == submitter) {
            params.emplace_back(*name, node.attr_or("value"));
        }
    });
    const std::string method = to_lower(form.attr_or("method", "get"));
    const std::string action = form.attr_or("action", split_target(current_).path);
    auto resolved = resolve_href(origin_, split_target(current_).path, action);
    if (!resolved) return "blocked: form posts off-site";
    if (method == "post") {
        return load(Request{"POST", *resolved, build_query(params), "application/x-www-form-urlencoded", {}}, true);
    }
    return load(Request{"GET", split_target(*resolved).path + (params.empty() ? "" : "?" + build_query(params)), {}, {}, {}},
                true);
}

std::string Browser::click(const std::string& id) {
    const HtmlNode* node = element(id);
    if (!node) return "no element " + id;
    if (node->has_attr("disabled")) return "element " + id + " is disabled";
    if (node->tag == "a") return goto_url(decode_entities(node->attr_or("href")));
    const std::string type = to_lower(node->attr_or("type", node->tag == "button" ? "submit" : "text"));
    if (node->tag == "input" && (type == "checkbox" || type == "radio")) {
        if (type == "checkbox") {
            checked_[node] = !is_checked(*node);
            return std::string(checked_[node] ? "checked " : "unchecked ") + id;
        }
        return check(id);
    }
    if ((node->tag == "button" || node->tag == "input") && (type == "submit" || type == "image")) {
        if (const HtmlNode* form = form_of(node)) return submit(*form, node);
        return "button " + id + " is not in a form";
    }
    if (node->tag == "button") {
        // Script-only toggles have no no-script effect beyond revealing already-present markup.
        if (const std::string* surface = node->attr("data-sg-toggle")) return "toggled " + *surface;
        return "clicked " + id;
    }
    return "clicked " + id + " with no effect";
}

std::string Browser::fill(const std::string& id, const std::string& text) {
    const HtmlNode* node = element(id);
    if (!node) return "no element " + id;
    if (node->tag != "input" && node->tag != "textarea") return "element " + id + " does not accept text";
    values_[node] = text;
    return "filled " + id;
}

std::string Browser::select_option(const std::string& id, const std::string& value) {
    const HtmlNode* node = element(id);
    if (!node || node->tag != "select") return "no select " + id;
    for (const HtmlNode* o : find_elements(*node, [](const HtmlNode& n) { return n.tag == "option"; })) {
        const std::string option_value = o->attr_or("value", o->text_content());
        if (option_value == value || o->text_content() == value) {
            values_[node] = option_value;
            return "selected " + option_value;
        }
    }
    return "no option '" + value + "' in " + id;
}

std::string Browser::check(const std::string& id) {
    const HtmlNode* node = element(id);
    if (!node || node->tag != "input") return "no checkable element " + id;
    if (node->has_attr("disabled")) return "element " + id + " is disabled";
    const std::string type = to_lower(node->attr_or("type", "text"));
    if (type == "radio") {
        const std::string name = node->attr_or("name");
        const HtmlNode* form = form_of(node);
        for (const HtmlNode* other : elements_) {
            if (other->tag == "input" && other->attr_or("name") == name && form_of(other) == form) checked_[other] = false;
        }
    } else if (type != "checkbox") {
        return "element " + id + " is not checkable";
    }
    checked_[node] = true;
    return "checked " + id;
}

std::string Browser::go_back() {
    if (history_.empty()) return "no history";
    const std::string previous = history_.back();
    history_.pop_back();
    return load(Request{"GET", previous, {}, {}, {}}, false);
}

Observation Browser::observation(int step, std::vector<std::string> memory) const {
    Observation o;
    o.url = current_;
    o.status = status_;
    o.html = body_;
    o.step = step;
    o.memory = std::move(memory);
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        const HtmlNode& node = *elements_[i];
        std::string text = node.text_content();
        if (text.size() > 80) text = text.substr(0, 80);
        o.elements.push_back(ElementRef{overlay_id(i), node.tag, text, node.attributes});
    }
    return o;
}

CartState Browser::cart() {
    if (session_.empty()) return CartState{};
    Response r = transport_.send(Request{"GET", "/cart.js", {}, {}, session_});
    if (r.status != 200) return CartState{};
    return cart_from_json(json::parse(r.body));
}

}  // namespace storebench
