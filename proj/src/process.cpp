#include "storebench/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <tuple>

namespace storebench {

namespace {

void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
}

}  // namespace

ProcessResult run_process(const std::string& command, const std::string& input, std::chrono::milliseconds timeout) {
    int in_pipe[2];
    int out_pipe[2];
    int err_pipe[2];
    if (::pipe(in_pipe) != 0) throw ProcessError(std::string("pipe: ") + std::strerror(errno));
    if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
        throw ProcessError(std::string("pipe: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw ProcessError(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    int to_child = in_pipe[1];
    int from_out = out_pipe[0];
    int from_err = err_pipe[0];
    ::fcntl(to_child, F_SETFL, O_NONBLOCK);
    // A child that exits without reading its input must not kill us.
    ::signal(SIGPIPE, SIG_IGN);

    ProcessResult result;
    std::size_t written = 0;
    if (input.empty()) close_fd(to_child);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    char buffer[4096];
    while (from_out >= 0 || from_err >= 0) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            result.timed_out = true;
            break;
        }
        pollfd fds[3];
        int n = 0;
        int out_slot = -1, err_slot = -1, in_slot = -1;
        if (from_out >= 0) { fds[n] = {from_out, POLLIN, 0}; out_slot = n++; }
        if (from_err >= 0) { fds[n] = {from_err, POLLIN, 0}; err_slot = n++; }
        if (to_child >= 0) { fds[n] = {to_child, POLLOUT, 0}; in_slot = n++; }
        const int ready = ::poll(fds, static_cast<nfds_t>(n), static_cast<int>(left.count()));
        if (ready < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (in_slot >= 0 && fds[in_slot].revents) {
            if (fds[in_slot].revents & POLLOUT) {
                const ssize_t k = ::write(to_child, input.data() + written, input.size() - written);
                if (k > 0) written += static_cast<std::size_t>(k);
                if (k < 0 && errno != EAGAIN) close_fd(to_child);
            } else {
                close_fd(to_child);
            }
            if (written == input.size()) close_fd(to_child);
        }
        for (auto [slot, fd, sink] : {std::tuple{out_slot, &from_out, &result.out}, std::tuple{err_slot, &from_err, &result.err}}) {
            if (slot < 0 || !fds[slot].revents) continue;
            const ssize_t k = ::read(*fd, buffer, sizeof buffer);
            if (k > 0) {
                sink->append(buffer, static_cast<std::size_t>(k));
            } else if (k == 0 || errno != EINTR) {
                close_fd(*fd);
            }
        }
    }
    close_fd(to_child);
    close_fd(from_out);
    close_fd(from_err);
    if (result.timed_out) ::kill(pid, SIGKILL);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else {
        result.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    }
    return result;
}

}  // namespace storebench
