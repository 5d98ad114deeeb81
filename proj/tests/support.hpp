#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

#include "storebench/storefront.hpp"

namespace storebench::testing {

/// Fresh scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        std::string pattern = (std::filesystem::temp_directory_path() / "storebench-XXXXXX").string();
        if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
        path_ = pattern;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::filesystem::path data_dir() { return STOREBENCH_TEST_DATA; }

inline Response get(Storefront& sf, const std::string& target, const std::string& session = {}) {
    return sf.handle(Request{"GET", target, {}, {}, session});
}

inline Response post_form(Storefront& sf, const std::string& target, const std::string& body,
                          const std::string& session = {}) {
    return sf.handle(Request{"POST", target, body, "application/x-www-form-urlencoded", session});
}

inline Response post_json(Storefront& sf, const std::string& target, const nlohmann::json& body,
                          const std::string& session = {}) {
    return sf.handle(Request{"POST", target, body.dump(), "application/json", session});
}

/// Session token from a Set-Cookie header, empty when none was set.
inline std::string session_from(const Response& r) {
    for (const auto& [name, value] : r.headers) {
        if (name != "Set-Cookie") continue;
        const std::string prefix = std::string(kSessionCookie) + "=";
        if (value.rfind(prefix, 0) == 0) return value.substr(prefix.size(), value.find(';') - prefix.size());
    }
    return {};
}

}  // namespace storebench::testing
