#pragma once

#include <chrono>
#include <stdexcept>
#include <string>

namespace storebench {

class ProcessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProcessResult {
    int exit_code = 0;
    std::string out;
    std::string err;
    bool timed_out = false;
};

/// Runs `command` under /bin/sh with `input` on stdin and collects both output streams.
/// The child is killed when `timeout` elapses. Throws ProcessError when it cannot be started.
ProcessResult run_process(const std::string& command, const std::string& input, std::chrono::milliseconds timeout);

}  // namespace storebench
