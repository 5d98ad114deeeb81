#include "storebench/server.hpp"

#include <condition_variable>
#include <thread>

#include <httplib.h>

namespace storebench {

namespace {

std::string cookie_value(const std::string& header, std::string_view name) {
    std::size_t i = 0;
    while (i < header.size()) {
        while (i < header.size() && (header[i] == ' ' || header[i] == ';')) ++i;
        const auto end = header.find(';', i);
        const std::string pair = header.substr(i, end == std::string::npos ? std::string::npos : end - i);
        const auto eq = pair.find('=');
        if (eq != std::string::npos && pair.substr(0, eq) == name) return pair.substr(eq + 1);
        if (end == std::string::npos) break;
        i = end + 1;
    }
    return {};
}

}  // namespace

struct StorefrontServer::Impl {
    httplib::Server server;
    std::thread thread;
    std::string host;
    int port = 0;
    std::mutex mutex;
    std::condition_variable stopped_cv;
    bool stopped = false;
};

StorefrontServer::StorefrontServer(Storefront& storefront, const std::string& host, int port)
    : impl_(std::make_unique<Impl>()) {
    impl_->host = host;
    auto handler = [&storefront](const httplib::Request& req, httplib::Response& res) {
        Request request;
        request.method = req.method;
        request.target = req.target;
        request.body = req.body;
        request.content_type = req.get_header_value("Content-Type");
        request.session = cookie_value(req.get_header_value("Cookie"), kSessionCookie);
        Response response = storefront.handle(request);
        res.status = response.status;
        for (const auto& [key, value] : response.headers) res.set_header(key, value);
        res.set_content(response.body, response.content_type);
    };
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
    impl_->server.Put(".*", handler);
    impl_->server.Delete(".*", handler);
    impl_->server.new_task_queue = [] { return new httplib::ThreadPool(8); };

    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
    } else {
        impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (impl_->port <= 0) {
        throw ServerError("could not bind " + host + ":" + std::to_string(port));
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

StorefrontServer::~StorefrontServer() {
    stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int StorefrontServer::port() const { return impl_->port; }

std::string StorefrontServer::base_url() const {
    const std::string host = impl_->host == "0.0.0.0" ? "127.0.0.1" : impl_->host;
    return "http://" + host + ":" + std::to_string(impl_->port);
}

void StorefrontServer::stop() {
    impl_->server.stop();
    std::lock_guard lock(impl_->mutex);
    impl_->stopped = true;
    impl_->stopped_cv.notify_all();
}

void StorefrontServer::wait() {
    std::unique_lock lock(impl_->mutex);
    impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

}  // namespace storebench
