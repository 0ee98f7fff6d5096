#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "ppc/base64.hpp"
#include "ppc/critic.hpp"
#include "ppc/image_io.hpp"

namespace ppc {

// Hosts an out-of-process critic behind the line-delimited JSON protocol:
//   -> {"type":"hello","patch_resolution":N}      <- {"type":"ready"}
//   -> {"type":"eval","observed_png":"..","rendered_png":".."}
//                                                 <- {"type":"error_px","value":x}
// One request in flight per subprocess.
class ExternalCritic final : public Critic {
 public:
  explicit ExternalCritic(const std::string& command, int patch_resolution = 512,
                          double timeout_seconds = 10.0)
      : command_(command), timeout_seconds_(timeout_seconds) {
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
      throw CriticProtocolError("external critic: pipe() failed");
    pid_ = fork();
    if (pid_ < 0) throw CriticProtocolError("external critic: fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]); close(to_child[1]);
      close(from_child[0]); close(from_child[1]);
      execlp("/bin/sh", "sh", "-c", command_.c_str(), (char*)nullptr);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];

    nlohmann::json hello = {{"type", "hello"}, {"patch_resolution", patch_resolution}};
    write_line(hello.dump());
    const auto reply = nlohmann::json::parse(read_line(), nullptr, false);
    if (reply.is_discarded() || reply.value("type", "") != "ready")
      throw CriticProtocolError("external critic: handshake failed (no ready message)");
  }

  ExternalCritic(const ExternalCritic&) = delete;
  ExternalCritic& operator=(const ExternalCritic&) = delete;

  ~ExternalCritic() override {
    if (write_fd_ >= 0) close(write_fd_);
    if (read_fd_ >= 0) close(read_fd_);
    if (pid_ > 0) {
      int status = 0;
      if (waitpid(pid_, &status, WNOHANG) == 0) {
        kill(pid_, SIGTERM);
        waitpid(pid_, &status, 0);
      }
    }
  }

  double evaluate(const CriticRequest& req) override {
    require(req.observed != nullptr && req.rendered != nullptr,
            "external critic: request must carry both patches");
    nlohmann::json msg = {{"type", "eval"},
                          {"observed_png", base64_encode(encode_png(req.observed->pixels))},
                          {"rendered_png", base64_encode(encode_png(req.rendered->pixels))}};
    write_line(msg.dump());
    const std::string line = read_line();
    const auto reply = nlohmann::json::parse(line, nullptr, false);
    if (reply.is_discarded() || reply.value("type", "") != "error_px" ||
        !reply.contains("value") || !reply["value"].is_number())
      throw CriticProtocolError("external critic: malformed response: " + line);
    const double value = reply["value"].get<double>();
    if (!std::isfinite(value) || value < 0.0)
      throw CriticProtocolError("external critic: invalid error value " + std::to_string(value));
    return value;
  }

  std::string name() const override { return "external"; }

 private:
  void write_line(const std::string& line) {
    std::string buf = line + "\n";
    size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = ::write(write_fd_, buf.data() + off, buf.size() - off);
      if (n <= 0) throw CriticProtocolError("external critic: subprocess closed its input");
      off += size_t(n);
    }
  }

  std::string read_line() {
    while (true) {
      const size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      struct pollfd pfd = {read_fd_, POLLIN, 0};
      const int rc = poll(&pfd, 1, int(timeout_seconds_ * 1000.0));
      if (rc == 0) throw CriticProtocolError("external critic: response timeout");
      if (rc < 0) throw CriticProtocolError("external critic: poll() failed");
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n <= 0) throw CriticProtocolError("external critic: subprocess closed its output");
      buffer_.append(chunk, size_t(n));
    }
  }

  std::string command_;
  double timeout_seconds_;
  pid_t pid_ = -1;
  int write_fd_ = -1, read_fd_ = -1;
  std::string buffer_;
};

}  // namespace ppc
