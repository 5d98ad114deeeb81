#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "storebench/html.hpp"
#include "storebench/storefront.hpp"
#include "storebench/url.hpp"

namespace storebench {

/// The environment could not be reached at all.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sends one request to a storefront. `Request::session` carries the session cookie value.
class Transport {
public:
    virtual ~Transport() = default;
    virtual Response send(const Request& request) = 0;
};

std::unique_ptr<Transport> make_storefront_transport(Storefront& storefront);
/// Throws TransportError from send() when the server cannot be reached.
std::unique_ptr<Transport> make_http_transport(const std::string& base_url);

/// Interactive elements in document order; element i is addressed as "elem-<i+1>".
std::vector<const HtmlNode*> overlay_elements(const HtmlNode& document);
std::string overlay_id(std::size_t index);

struct ElementRef {
    std::string id;
    std::string tag;
    std::string text;
    std::vector<std::pair<std::string, std::string>> attributes;
};

void to_json(nlohmann::json& j, const ElementRef& e);

struct Observation {
    std::string url;
    int status = 0;
    std::string html;
    std::vector<ElementRef> elements;
    int step = 0;
    std::vector<std::string> memory;
};

void to_json(nlohmann::json& j, const Observation& o);

/// A minimal no-script browser: cookies, history, links and form submission.
class Browser {
public:
    explicit Browser(Transport& transport);

    /// Each returns a short outcome description.
    std::string goto_url(const std::string& target);
    std::string click(const std::string& element_id);
    std::string fill(const std::string& element_id, const std::string& text);
    std::string select_option(const std::string& element_id, const std::string& value);
    std::string check(const std::string& element_id);
    std::string go_back();

    Observation observation(int step, std::vector<std::string> memory) const;
    const std::string& current_url() const { return current_; }
    int status() const { return status_; }
    const HtmlNode& document() const { return document_; }
    const std::string& session() const { return session_; }
    /// Every page load, redirects resolved, in order.
    const std::vector<std::string>& visited() const { return visited_; }
    CartState cart();

private:
    std::string load(Request request, bool push_history);
    const HtmlNode* element(const std::string& id) const;
    const HtmlNode* form_of(const HtmlNode* node) const;
    std::string submit(const HtmlNode& form, const HtmlNode* submitter);
    bool is_checked(const HtmlNode& node) const;

    Transport& transport_;
    Origin origin_{"http", "storefront.local", 80, "/"};
    std::string session_;
    std::string current_;
    int status_ = 0;
    std::string body_;
    HtmlNode document_;
    std::vector<const HtmlNode*> elements_;
    std::map<const HtmlNode*, const HtmlNode*> parents_;
    std::map<const HtmlNode*, std::string> values_;
    std::map<const HtmlNode*, bool> checked_;
    std::vector<std::string> history_;
    std::vector<std::string> visited_;
};

}  // namespace storebench
