#pragma once

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

#include "claimrank/errors.hpp"
#include "claimrank/lm_scorer.hpp"

namespace claimrank {

// Bridges to an out-of-process scorer speaking line-delimited JSON on
// stdin/stdout. Requests carry a monotonically increasing id; the process
// must answer each request with one line echoing the same id. Requests are
// strictly sequential per process.
class ExternalScorer : public CandidateScorer {
 public:
  explicit ExternalScorer(const std::string& command, int timeout_ms = 30000)
      : timeout_ms_(timeout_ms) {
    // Writes to a dead child must surface as errno, not a fatal signal.
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw ScorerError("pipe: " + errno_text());
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw ScorerError("pipe: " + errno_text());
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      throw ScorerError("fork: " + errno_text());
    }
    if (pid_ == 0) {
      // Own process group, so shutdown() can kill the shell AND anything the
      // shell forked (a grandchild would otherwise outlive a SIGKILL to sh).
      ::setpgid(0, 0);
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::setpgid(pid_, pid_);  // mirrored parent-side to close the startup race
    ::close(to_child[0]);
    ::close(from_child[1]);
    request_fd_ = to_child[1];
    response_fd_ = from_child[0];
  }

  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  ~ExternalScorer() override { shutdown(); }

  std::vector<Candidate> score_candidates(const std::vector<std::string>& left,
                                          const std::vector<std::string>& right,
                                          std::size_t top_k) override {
    if (top_k < 1) throw InvalidTopKError("top_k must be at least 1");
    if (pid_ < 0) throw ScorerError("scorer process is not running");

    nlohmann::ordered_json request;
    request["id"] = ++last_id_;
    request["left"] = left;
    request["right"] = right;
    request["top_k"] = top_k;
    send_line(request.dump());

    const std::string line = read_line();
    nlohmann::json response;
    try {
      response = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("unparseable response: ") + e.what());
    }
    return validate(response, top_k);
  }

 private:
  std::vector<Candidate> validate(const nlohmann::json& response, std::size_t top_k) const {
    if (!response.is_object() || !response.contains("id") ||
        !response.contains("candidates")) {
      throw ProtocolError("response missing id or candidates");
    }
    if (!response["id"].is_number_integer() ||
        response["id"].get<std::int64_t>() != last_id_) {
      throw ProtocolError("response id does not match request id " +
                          std::to_string(last_id_));
    }
    const nlohmann::json& cands = response["candidates"];
    if (!cands.is_array()) throw ProtocolError("candidates is not an array");
    if (cands.size() > top_k) {
      throw ProtocolError("got " + std::to_string(cands.size()) +
                          " candidates for top_k=" + std::to_string(top_k));
    }
    std::vector<Candidate> out;
    out.reserve(cands.size());
    for (const nlohmann::json& c : cands) {
      if (!c.is_object() || !c.contains("token") || !c.contains("logprob") ||
          !c["token"].is_string() || !c["logprob"].is_number()) {
        throw ProtocolError("malformed candidate entry");
      }
      const double logprob = c["logprob"].get<double>();
      if (!std::isfinite(logprob)) throw ProtocolError("non-finite logprob");
      if (!out.empty() && logprob > out.back().logprob) {
        throw ProtocolError("candidates not sorted by descending logprob");
      }
      out.push_back({c["token"].get<std::string>(), logprob});
    }
    return out;
  }

  void send_line(std::string payload) {
    payload.push_back('\n');
    std::size_t sent = 0;
    while (sent < payload.size()) {
      const ssize_t n = ::write(request_fd_, payload.data() + sent, payload.size() - sent);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("scorer process rejected request: " + errno_text());
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
    while (true) {
      const std::size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) {
        shutdown();
        throw TimeoutError("scorer exceeded " + std::to_string(timeout_ms_) + " ms");
      }
      pollfd pfd{response_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw ScorerError("poll: " + errno_text());
      }
      if (ready == 0) {
        shutdown();
        throw TimeoutError("scorer exceeded " + std::to_string(timeout_ms_) + " ms");
      }
      char chunk[4096];
      const ssize_t n = ::read(response_fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerError("read: " + errno_text());
      }
      if (n == 0) throw ProtocolError("scorer closed its output mid-request");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void shutdown() {
    if (request_fd_ >= 0) ::close(request_fd_);
    if (response_fd_ >= 0) ::close(response_fd_);
    request_fd_ = response_fd_ = -1;
    if (pid_ > 0) {
      // Closing stdin asks the process to exit; give it a moment, then kill
      // the whole group so descendants of the launching shell die too.
      bool reaped = false;
      for (int i = 0; i < 20; ++i) {
        const pid_t r = ::waitpid(pid_, nullptr, WNOHANG);
        if (r == pid_) {
          reaped = true;
          break;
        }
        if (r < 0 && errno != EINTR) break;
        ::usleep(10 * 1000);
      }
      if (!reaped) {
        ::kill(-pid_, SIGKILL);
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, nullptr, 0);
      }
      pid_ = -1;
    }
  }

  static std::string errno_text() { return std::strerror(errno); }

  pid_t pid_ = -1;
  int request_fd_ = -1;
  int response_fd_ = -1;
  int timeout_ms_;
  std::int64_t last_id_ = 0;
  std::string buffer_;
};

}  // namespace claimrank
