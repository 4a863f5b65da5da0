// Client side of the line-oriented JSON prediction protocol:
//   request  {"id": <int>, "text": <string>}
//   response {"id": <int>, "p_regulatory": <float in [0,1]>}
//   shutdown {"cmd": "quit"}

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <json.hpp>
#include <thread>
#include <unordered_map>

#include "lexrule/classifier.hpp"

namespace lexrule {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    struct sigaction current {};
    sigaction(SIGPIPE, nullptr, &current);
    if (current.sa_handler == SIG_DFL) signal(SIGPIPE, SIG_IGN);
  });
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }
  int get() const noexcept { return fd_; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

class SubprocessClassifier final : public Classifier {
 public:
  SubprocessClassifier(const std::vector<std::string>& command, const SubprocessOptions& options)
      : options_(options), name_(command.empty() ? "" : command.front()) {
    if (command.empty()) throw FallbackUnavailable("empty fallback command");
    ignore_sigpipe_once();

    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) != 0) throw FallbackUnavailable(errno_text("pipe"));
    Fd in_r(in_pipe[0]), in_w(in_pipe[1]);
    if (pipe2(out_pipe, O_CLOEXEC) != 0) throw FallbackUnavailable(errno_text("pipe"));
    Fd out_r(out_pipe[0]), out_w(out_pipe[1]);
    if (pipe2(err_pipe, O_CLOEXEC) != 0) throw FallbackUnavailable(errno_text("pipe"));
    Fd err_r(err_pipe[0]), err_w(err_pipe[1]);

    std::vector<char*> argv;
    for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    pid_ = fork();
    if (pid_ < 0) throw FallbackUnavailable(errno_text("fork"));
    if (pid_ == 0) {
      // Child: only async-signal-safe calls from here on.
      dup2(in_r.get(), STDIN_FILENO);
      dup2(out_w.get(), STDOUT_FILENO);
      execvp(argv[0], argv.data());
      int e = errno;
      [[maybe_unused]] auto n = write(err_w.get(), &e, sizeof e);
      _exit(127);
    }
    err_w.reset();
    int exec_errno = 0;
    ssize_t got;
    do {
      got = read(err_r.get(), &exec_errno, sizeof exec_errno);
    } while (got < 0 && errno == EINTR);
    if (got > 0) {
      waitpid(pid_, nullptr, 0);
      pid_ = -1;
      throw FallbackUnavailable("cannot execute '" + command.front() + "': " + std::strerror(exec_errno));
    }
    to_child_ = std::move(in_w);
    from_child_ = std::move(out_r);
    fcntl(to_child_.get(), F_SETFL, fcntl(to_child_.get(), F_GETFL) | O_NONBLOCK);
    fcntl(from_child_.get(), F_SETFL, fcntl(from_child_.get(), F_GETFL) | O_NONBLOCK);
  }

  ~SubprocessClassifier() override { shutdown(); }

  std::string name() const override { return name_; }

  std::vector<double> classify_batch(std::span<const std::string> texts) override {
    std::lock_guard lock(mutex_);
    if (broken_) throw FallbackUnavailable(name_ + ": child process is no longer usable");
    if (texts.empty()) return {};
    try {
      return exchange(texts);
    } catch (...) {
      broken_ = true;
      kill_child();
      throw;
    }
  }

 private:
  static std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

  std::vector<double> exchange(std::span<const std::string> texts) {
    std::unordered_map<long long, std::size_t> pending;
    std::string outgoing;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      long long id = next_id_++;
      pending.emplace(id, i);
      nlohmann::json req{{"id", id}, {"text", texts[i]}};
      outgoing += req.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
      outgoing += '\n';
    }

    std::vector<double> scores(texts.size(), -1.0);
    std::size_t written = 0;
    auto last_progress = Clock::now();
    while (!pending.empty()) {
      pollfd fds[2] = {{from_child_.get(), POLLIN, 0}, {to_child_.get(), POLLOUT, 0}};
      nfds_t nfds = written < outgoing.size() ? 2 : 1;
      auto remaining = options_.request_timeout - std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - last_progress);
      if (remaining.count() <= 0) throw FallbackUnavailable(name_ + ": timed out waiting for a response");
      int rc = poll(fds, nfds, static_cast<int>(remaining.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw FallbackUnavailable(errno_text("poll"));
      }
      if (rc == 0) continue;

      if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        ssize_t n = write(to_child_.get(), outgoing.data() + written, outgoing.size() - written);
        if (n < 0 && errno != EAGAIN && errno != EINTR)
          throw FallbackUnavailable(name_ + ": child closed its input (" + std::strerror(errno) + ")");
        if (n > 0) {
          written += static_cast<std::size_t>(n);
          last_progress = Clock::now();
        }
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        char buf[8192];
        ssize_t n = read(from_child_.get(), buf, sizeof buf);
        if (n == 0) throw FallbackUnavailable(name_ + ": child exited with " + std::to_string(pending.size()) + " requests unanswered");
        if (n < 0) {
          if (errno == EAGAIN || errno == EINTR) continue;
          throw FallbackUnavailable(errno_text("read"));
        }
        last_progress = Clock::now();
        buffer_.append(buf, static_cast<std::size_t>(n));
        for (auto nl = buffer_.find('\n'); nl != std::string::npos; nl = buffer_.find('\n')) {
          std::string line = buffer_.substr(0, nl);
          buffer_.erase(0, nl + 1);
          accept_response(line, pending, scores);
        }
      }
    }
    return scores;
  }

  void accept_response(const std::string& line, std::unordered_map<long long, std::size_t>& pending,
                       std::vector<double>& scores) {
    auto violation = [&](const std::string& why) {
      return FallbackUnavailable(name_ + ": protocol violation (" + why + "): " + line.substr(0, 200));
    };
    nlohmann::json msg;
    try {
      msg = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw violation("not JSON");
    }
    if (!msg.is_object() || !msg.contains("id") || !msg["id"].is_number_integer())
      throw violation("missing integer id");
    if (!msg.contains("p_regulatory") || !msg["p_regulatory"].is_number())
      throw violation("missing numeric p_regulatory");
    auto it = pending.find(msg["id"].get<long long>());
    if (it == pending.end()) throw violation("unknown or repeated id");
    double p = msg["p_regulatory"].get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw violation("p_regulatory outside [0,1]");
    scores[it->second] = p;
    pending.erase(it);
  }

  void kill_child() {
    if (pid_ <= 0) return;
    ::kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
    to_child_.reset();
    from_child_.reset();
  }

  void shutdown() {
    if (pid_ <= 0) return;
    if (!broken_) {
      static constexpr char kQuit[] = "{\"cmd\": \"quit\"}\n";
      fcntl(to_child_.get(), F_SETFL, fcntl(to_child_.get(), F_GETFL) & ~O_NONBLOCK);
      [[maybe_unused]] auto n = write(to_child_.get(), kQuit, sizeof kQuit - 1);
    }
    to_child_.reset();
    auto deadline = Clock::now() + options_.shutdown_timeout;
    while (Clock::now() < deadline) {
      pid_t r = waitpid(pid_, nullptr, WNOHANG);
      if (r == pid_ || (r < 0 && errno == ECHILD)) {
        pid_ = -1;
        from_child_.reset();
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    kill_child();
  }

  SubprocessOptions options_;
  std::string name_;
  pid_t pid_ = -1;
  Fd to_child_;
  Fd from_child_;
  std::mutex mutex_;
  std::string buffer_;
  long long next_id_ = 1;
  bool broken_ = false;
};

}  // namespace

std::unique_ptr<Classifier> classifier_from_subprocess(const std::vector<std::string>& command,
                                                       const SubprocessOptions& options) {
  return std::make_unique<SubprocessClassifier>(command, options);
}

}  // namespace lexrule
