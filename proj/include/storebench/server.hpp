#pragma once

#include <memory>
#include <string>

#include "storebench/storefront.hpp"

namespace storebench {

class ServerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Serves a Storefront over HTTP on a background thread. Port 0 picks a free port.
/// The server stops when the handle is destroyed.
class StorefrontServer {
public:
    StorefrontServer(Storefront& storefront, const std::string& host, int port);
    ~StorefrontServer();
    StorefrontServer(const StorefrontServer&) = delete;
    StorefrontServer& operator=(const StorefrontServer&) = delete;

    int port() const;
    std::string base_url() const;
    void stop();
    /// Blocks until stop() is called from another thread.
    void wait();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace storebench
