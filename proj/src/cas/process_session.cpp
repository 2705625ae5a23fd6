#include "casbench/cas/process_session.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <mutex>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "casbench/util/text.hpp"

namespace casbench::cas {

namespace {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

constexpr std::size_t recent_window = 4096;
constexpr std::size_t head_slack = 64 * 1024;

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

void set_nonblocking(int fd) {
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

std::string strip_carriage_returns(std::string text) {
    text.erase(std::remove(text.begin(), text.end(), '\r'), text.end());
    return text;
}

std::string_view rstrip(std::string_view text) {
    const auto last = text.find_last_not_of(" \t\r");
    return last == std::string_view::npos ? std::string_view{} : text.substr(0, last + 1);
}

// Largest prefix length <= limit that does not split a UTF-8 sequence.
std::size_t utf8_floor(std::string_view text, std::size_t limit) {
    if (limit >= text.size()) return text.size();
    while (limit > 0 && (static_cast<unsigned char>(text[limit]) & 0xC0) == 0x80) --limit;
    return limit;
}

std::chrono::milliseconds elapsed_since(Clock::time_point start) {
    return std::chrono::duration_cast<milliseconds>(Clock::now() - start);
}

}  // namespace

struct ProcessSession::Capture {
    std::string head;
    std::string recent;
    std::size_t total = 0;
    std::size_t overflow = 0;
    bool eof = false;
    bool timed_out = false;
};

ProcessSession::ProcessSession(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {}

ProcessSession::~ProcessSession() {
    if (pid_ <= 0) return;
    close_fd(to_child_);
    const auto deadline = Clock::now() + milliseconds(200);
    while (Clock::now() < deadline) {
        int status = 0;
        if (::waitpid(pid_, &status, WNOHANG) == pid_) {
            pid_ = -1;
            close_fd(from_child_);
            return;
        }
        std::this_thread::sleep_for(milliseconds(5));
    }
    kill_process();
}

void ProcessSession::launch() {
    const auto& argv_text = descriptor_.launch_command;
    if (argv_text.empty()) throw LaunchFailed("backend '" + descriptor_.name + "': empty launch command");

    int in_pipe[2];
    int out_pipe[2];
    int status_pipe[2];
    if (::pipe(in_pipe) != 0) throw LaunchFailed(std::string("pipe: ") + std::strerror(errno));
    if (::pipe(out_pipe) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw LaunchFailed(std::string("pipe: ") + std::strerror(errno));
    }
    if (::pipe2(status_pipe, O_CLOEXEC) != 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
        throw LaunchFailed(std::string("pipe: ") + std::strerror(errno));
    }

    std::vector<char*> argv;
    argv.reserve(argv_text.size() + 1);
    for (const auto& arg : argv_text) argv.push_back(const_cast<char*>(arg.c_str()));
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], status_pipe[0], status_pipe[1]}) ::close(fd);
        throw LaunchFailed(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(out_pipe[1], STDERR_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], status_pipe[0]}) ::close(fd);
        ::execvp(argv[0], argv.data());
        const int err = errno;
        [[maybe_unused]] auto written = ::write(status_pipe[1], &err, sizeof err);
        ::_exit(127);
    }

    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(status_pipe[1]);

    int exec_errno = 0;
    ssize_t n = 0;
    do {
        n = ::read(status_pipe[0], &exec_errno, sizeof exec_errno);
    } while (n < 0 && errno == EINTR);
    ::close(status_pipe[0]);
    if (n > 0) {
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        int status = 0;
        ::waitpid(pid, &status, 0);
        throw LaunchFailed("cannot execute '" + argv_text.front() + "': " + std::strerror(exec_errno));
    }

    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    set_nonblocking(to_child_);
    set_nonblocking(from_child_);
}

ProcessSession::Capture ProcessSession::exchange(const std::string& input, milliseconds timeout) {
    Capture capture;
    const auto& prompt = descriptor_.prompt_marker;
    const std::size_t head_cap =
        descriptor_.output_byte_limit ? *descriptor_.output_byte_limit + head_slack : std::string::npos;

    const auto at_prompt = [&] {
        const auto& recent = capture.recent;
        if (recent.size() < prompt.size()) return false;
        if (recent.compare(recent.size() - prompt.size(), prompt.size(), prompt) != 0) return false;
        return capture.total == prompt.size() || recent[recent.size() - prompt.size() - 1] == '\n';
    };
    const auto append = [&](std::string_view bytes) {
        capture.total += bytes.size();
        const std::size_t room = head_cap == std::string::npos ? bytes.size() : head_cap - std::min(head_cap, capture.head.size());
        capture.head.append(bytes.substr(0, std::min(room, bytes.size())));
        if (bytes.size() > room) capture.overflow += bytes.size() - room;
        capture.recent.append(bytes);
        if (capture.recent.size() > recent_window) capture.recent.erase(0, capture.recent.size() - recent_window);
    };

    std::size_t written = 0;
    const auto deadline = Clock::now() + timeout;
    auto last_data = Clock::now();
    char buffer[8192];

    while (true) {
        const auto now = Clock::now();
        if (now >= deadline) {
            capture.timed_out = true;
            return capture;
        }
        const bool input_done = written >= input.size();
        const bool ready = input_done && at_prompt();
        if (ready && now - last_data >= descriptor_.quiescence) return capture;

        auto wait = ready ? descriptor_.quiescence - std::chrono::duration_cast<milliseconds>(now - last_data)
                          : milliseconds(100);
        wait = std::clamp(wait, milliseconds(1),
                          std::max(milliseconds(1), std::chrono::duration_cast<milliseconds>(deadline - now)));

        pollfd fds[2] = {{from_child_, POLLIN, 0}, {to_child_, POLLOUT, 0}};
        const nfds_t count = input_done ? 1 : 2;
        const int rc = ::poll(fds, count, static_cast<int>(wait.count()));
        if (rc < 0) {
            if (errno == EINTR) continue;
            capture.eof = true;
            return capture;
        }

        if ((fds[0].revents & (POLLIN | POLLHUP | POLLERR)) != 0) {
            while (true) {
                const ssize_t n = ::read(from_child_, buffer, sizeof buffer);
                if (n > 0) {
                    append(std::string_view(buffer, static_cast<std::size_t>(n)));
                    last_data = Clock::now();
                    continue;
                }
                if (n == 0) {
                    capture.eof = true;
                    return capture;
                }
                if (errno == EINTR) continue;
                break;
            }
        }

        if (count == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP)) != 0) {
            const ssize_t n = ::write(to_child_, input.data() + written, input.size() - written);
            if (n > 0) {
                written += static_cast<std::size_t>(n);
            } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
                capture.eof = true;
                return capture;
            }
        }
    }
}

std::string ProcessSession::clean_output(const std::string& raw, const std::string& sent) const {
    const auto& prompt = descriptor_.prompt_marker;
    std::string text = strip_carriage_returns(util::sanitize_utf8(raw));
    if (text.size() >= prompt.size() && text.compare(text.size() - prompt.size(), prompt.size(), prompt) == 0) {
        text.resize(text.size() - prompt.size());
    }

    std::vector<std::string> sent_lines;
    for (auto& line : util::split_lines(sent)) {
        if (!rstrip(line).empty()) sent_lines.push_back(std::move(line));
    }

    std::string cleaned;
    std::size_t next_echo = 0;
    auto lines = util::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (next_echo < sent_lines.size() && util::starts_with(line, prompt) &&
            rstrip(std::string_view(line).substr(prompt.size())) == rstrip(sent_lines[next_echo])) {
            ++next_echo;
            continue;
        }
        cleaned.append(line);
        if (i + 1 < lines.size()) cleaned.push_back('\n');
    }
    return cleaned;
}

StatementResult ProcessSession::run_statement(const Statement& statement) {
    StatementResult result{statement, {}, milliseconds(0), false};
    if (!needs_execution(statement)) return result;
    if (pid_ <= 0) throw SessionDead("backend '" + descriptor_.name + "' is not running", {});

    std::string sent = code_lines(statement.text);
    if (!sent.empty() && sent.back() != '\n') sent.push_back('\n');
    if (!is_terminated(statement)) sent.append(";\n");

    const auto start = Clock::now();
    auto capture = exchange(sent, descriptor_.statement_timeout);
    result.duration = elapsed_since(start);

    if (capture.timed_out) {
        kill_process();
        throw StatementTimeout("statement exceeded " + std::to_string(descriptor_.statement_timeout.count()) +
                                   " ms: " + std::string(util::trim(statement.text)),
                               {});
    }
    if (capture.eof) {
        kill_process();
        throw SessionDead("backend '" + descriptor_.name + "' exited while executing: " +
                              std::string(util::trim(statement.text)),
                          {});
    }

    std::string output = clean_output(capture.head, sent);
    if (descriptor_.output_byte_limit && (output.size() > *descriptor_.output_byte_limit || capture.overflow > 0)) {
        const std::size_t keep = utf8_floor(output, *descriptor_.output_byte_limit);
        std::size_t omitted = output.size() - keep;
        if (capture.overflow > descriptor_.prompt_marker.size()) {
            omitted += capture.overflow - descriptor_.prompt_marker.size();
        }
        output.resize(keep);
        if (!output.empty() && output.back() != '\n') output.push_back('\n');
        output += "[[output truncated: " + std::to_string(omitted) + " bytes omitted]]";
        result.truncated = true;
    }
    result.outputs = segment_output(output, descriptor_.warning_prefix, descriptor_.error_prefix);

    if (is_restart(statement)) run_init_statements();
    return result;
}

void ProcessSession::run_init_statements() {
    for (const auto& init : descriptor_.init_statements) {
        for (const auto& statement : split_statements(init)) {
            if (is_restart(statement)) throw InitFailed("init statements must not restart the session");
            const auto result = run_statement(statement);
            for (const auto& block : result.outputs) {
                if (block.kind == OutputKind::error) {
                    throw InitFailed("init statement '" + std::string(util::trim(statement.text)) +
                                     "' failed: " + block.text);
                }
            }
        }
    }
    ++init_runs_;
}

std::vector<StatementResult> ProcessSession::execute_chunk(std::string_view chunk) {
    std::vector<StatementResult> results;
    for (const auto& statement : split_statements(chunk)) {
        try {
            results.push_back(run_statement(statement));
        } catch (const StatementTimeout& e) {
            throw StatementTimeout(e.what(), std::move(results));
        } catch (const SessionDead& e) {
            throw SessionDead(e.what(), std::move(results));
        }
    }
    return results;
}

void ProcessSession::kill_process() {
    if (pid_ > 0) {
        ::kill(-pid_, SIGKILL);
        ::kill(pid_, SIGKILL);
        int status = 0;
        while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
        }
        pid_ = -1;
    }
    close_fd(to_child_);
    close_fd(from_child_);
}

std::unique_ptr<ProcessSession> start_session(const BackendDescriptor& descriptor) {
    try {
        descriptor.validate();
    } catch (const std::invalid_argument& e) {
        throw LaunchFailed(e.what());
    }
    ignore_sigpipe_once();

    std::unique_ptr<ProcessSession> session(new ProcessSession(descriptor));
    session->launch();

    auto capture = session->exchange("", descriptor.startup_timeout);
    if (capture.eof) {
        session->kill_process();
        throw LaunchFailed("backend '" + descriptor.name + "' exited before showing a prompt");
    }
    if (capture.timed_out) {
        session->kill_process();
        throw LaunchFailed("backend '" + descriptor.name + "' showed no prompt within " +
                           std::to_string(descriptor.startup_timeout.count()) + " ms");
    }
    session->banner_ = session->clean_output(capture.head, "");

    try {
        session->run_init_statements();
    } catch (const ChunkAborted& e) {
        throw InitFailed(std::string("init statements aborted: ") + e.what());
    }
    return session;
}

}  // namespace casbench::cas
