// Copyright 2026 The duet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "duet/transport.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "duet/error.hpp"
#include "httplib.h"

namespace duet {
namespace {

class RetryingTransport : public JsonTransport {
 public:
  explicit RetryingTransport(TransportOptions options) : options_(options) {}

  std::string call(const std::string& request) final {
    std::string last_error = "no attempts made";
    const int attempts = std::max(1, options_.max_attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      try {
        return call_once(request);
      } catch (const ClientError& e) {
        last_error = e.what();
      }
      if (attempt < attempts) std::this_thread::sleep_for(options_.retry_backoff * attempt);
    }
    throw ClientError(describe() + " failed after " + std::to_string(attempts) +
                      " attempt(s): " + last_error);
  }

 protected:
  virtual std::string call_once(const std::string& request) = 0;
  virtual std::string describe() const = 0;

  TransportOptions options_;
};

class SubprocessTransport final : public RetryingTransport {
 public:
  SubprocessTransport(std::string command, TransportOptions options)
      : RetryingTransport(options), command_(std::move(command)) {
    // A child that exits before reading its whole request must not kill us.
    ::signal(SIGPIPE, SIG_IGN);
  }

 protected:
  std::string describe() const override { return "subprocess '" + command_ + "'"; }

  std::string call_once(const std::string& request) override {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw ClientError(std::string("pipe: ") + std::strerror(errno));
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw ClientError(std::string("pipe: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      throw ClientError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    int in_fd = to_child[1];
    const int out_fd = from_child[0];
    ::fcntl(in_fd, F_SETFL, O_NONBLOCK);

    const std::string payload = request + "\n";
    size_t written = 0;
    std::string response;
    bool failed = false;
    std::string failure;
    const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
    bool out_open = true;
    while (out_open) {
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) {
        failed = true;
        failure = "timed out";
        break;
      }
      pollfd fds[2];
      nfds_t n = 0;
      fds[n++] = {out_fd, POLLIN, 0};
      if (in_fd >= 0) fds[n++] = {in_fd, POLLOUT, 0};
      const int ready = ::poll(fds, n, static_cast<int>(remaining.count()));
      if (ready < 0 && errno != EINTR) {
        failed = true;
        failure = std::string("poll: ") + std::strerror(errno);
        break;
      }
      if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        const ssize_t w = ::write(in_fd, payload.data() + written, payload.size() - written);
        if (w > 0) written += static_cast<size_t>(w);
        if (w < 0 && errno != EAGAIN) written = payload.size();
        if (written >= payload.size()) {
          ::close(in_fd);
          in_fd = -1;
        }
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        char buf[8192];
        const ssize_t r = ::read(out_fd, buf, sizeof buf);
        if (r > 0) {
          response.append(buf, static_cast<size_t>(r));
        } else if (r == 0 || errno != EAGAIN) {
          out_open = false;
        }
      }
    }
    if (in_fd >= 0) ::close(in_fd);
    ::close(out_fd);
    if (failed) ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    if (failed) throw ClientError(failure);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      throw ClientError("child exited with status " + std::to_string(WEXITSTATUS(status)));
    }
    return response;
  }

 private:
  std::string command_;
};

class HttpTransport final : public RetryingTransport {
 public:
  HttpTransport(const std::string& url, TransportOptions options) : RetryingTransport(options), url_(url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw InputError("endpoint URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    base_ = path_start == std::string::npos ? url : url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

 protected:
  std::string describe() const override { return "HTTP endpoint " + url_; }

  std::string call_once(const std::string& request) override {
    httplib::Client client(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path_, request, "application/json");
    if (!res) throw ClientError("request failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
      throw ClientError("HTTP status " + std::to_string(res->status));
    }
    return res->body;
  }

 private:
  std::string url_;
  std::string base_;
  std::string path_;
};

}  // namespace

std::unique_ptr<JsonTransport> make_subprocess_transport(std::string command,
                                                         TransportOptions options) {
  return std::make_unique<SubprocessTransport>(std::move(command), options);
}

std::unique_ptr<JsonTransport> make_http_transport(const std::string& url, TransportOptions options) {
  return std::make_unique<HttpTransport>(url, options);
}

std::unique_ptr<JsonTransport> make_transport(const std::string& endpoint, TransportOptions options) {
  if (endpoint.starts_with("exec:")) return make_subprocess_transport(endpoint.substr(5), options);
  if (endpoint.starts_with("http://") || endpoint.starts_with("https://")) {
    return make_http_transport(endpoint, options);
  }
  throw InputError("unsupported endpoint '" + endpoint + "' (expected exec:... or http://...)");
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

}  // namespace duet
