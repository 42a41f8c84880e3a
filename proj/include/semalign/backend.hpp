#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semalign/token_model.hpp"

namespace semalign {

/**
 * External-backend adapter. The harness speaks a minimal request/response
 * protocol over a local socket: each request is one JSON line carrying the
 * prompt and decode parameters, each response one JSON line carrying the
 * generated text plus the boundary distribution as an array. Exactly one
 * request is in flight per connection. Endpoints are either
 * "unix:/path/to.sock" or "host:port" (IPv4).
 *
 * Request fields:  prompt, mode ("greedy"|"stochastic"), temperature,
 *                  top_p, top_k, max_tokens, seed
 * Response fields: text, probs, model_id
 */

struct BackendRequest {
  std::string prompt;
  DecodeConfig decode;
  int max_new_tokens = 0;
  std::uint64_t seed = 0;
};

struct BackendResponse {
  std::string text;
  std::vector<double> probs;
  std::string model_id;
};

inline std::string encode_request(const BackendRequest& req) {
  nlohmann::json j{
      {"prompt", req.prompt},
      {"mode", req.decode.mode == DecodeConfig::Mode::Greedy ? "greedy" : "stochastic"},
      {"temperature", req.decode.temperature},
      {"top_p", req.decode.top_p},
      {"top_k", req.decode.top_k},
      {"max_tokens", req.max_new_tokens},
      {"seed", req.seed},
  };
  return j.dump() + "\n";
}

inline BackendRequest decode_request(const std::string& line) {
  try {
    const nlohmann::json j = nlohmann::json::parse(line);
    BackendRequest req;
    req.prompt = j.at("prompt").get<std::string>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "greedy")
      req.decode.mode = DecodeConfig::Mode::Greedy;
    else if (mode == "stochastic")
      req.decode.mode = DecodeConfig::Mode::Stochastic;
    else
      throw std::invalid_argument("unknown mode: " + mode);
    req.decode.temperature = j.at("temperature").get<double>();
    req.decode.top_p = j.at("top_p").get<double>();
    req.decode.top_k = j.at("top_k").get<int>();
    req.max_new_tokens = j.at("max_tokens").get<int>();
    req.seed = j.at("seed").get<std::uint64_t>();
    req.decode.validate();
    return req;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed backend request: ") + e.what());
  }
}

inline std::string encode_response(const BackendResponse& res) {
  nlohmann::json j{
      {"text", res.text}, {"probs", res.probs}, {"model_id", res.model_id}};
  return j.dump() + "\n";
}

inline BackendResponse decode_response(const std::string& line) {
  try {
    const nlohmann::json j = nlohmann::json::parse(line);
    BackendResponse res;
    res.text = j.at("text").get<std::string>();
    res.probs = j.at("probs").get<std::vector<double>>();
    res.model_id = j.value("model_id", std::string("external"));
    return res;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed backend response: ") + e.what());
  }
}

/// Serves one already-decoded request against an in-process model.
inline BackendResponse serve_request(TokenModel& model, const BackendRequest& req) {
  Rng rng(req.seed);
  auto [text, boundary] =
      generate_with_probs(model, req.prompt, req.decode, req.max_new_tokens, rng);
  return BackendResponse{std::move(text), std::move(boundary.p), model.model_id()};
}

namespace net {

struct Endpoint {
  bool is_unix = false;
  std::string path;  // unix socket path
  std::string host;
  int port = 0;

  static Endpoint parse(const std::string& spec) {
    Endpoint e;
    if (spec.rfind("unix:", 0) == 0) {
      e.is_unix = true;
      e.path = spec.substr(5);
      if (e.path.empty()) throw std::invalid_argument("empty unix socket path");
      return e;
    }
    const auto colon = spec.rfind(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("endpoint must be unix:<path> or <host>:<port>");
    e.host = spec.substr(0, colon);
    e.port = std::stoi(spec.substr(colon + 1));
    if (e.host == "localhost") e.host = "127.0.0.1";
    if (e.port < 1 || e.port > 65535) throw std::invalid_argument("bad port");
    return e;
  }
};

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int release() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }

 private:
  int fd_ = -1;
};

inline Fd connect_endpoint(const Endpoint& ep) {
  if (ep.is_unix) {
    Fd fd(::socket(AF_UNIX, SOCK_STREAM, 0));
    if (!fd.valid()) throw std::runtime_error("socket() failed");
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (ep.path.size() >= sizeof(addr.sun_path))
      throw std::invalid_argument("unix socket path too long");
    std::strncpy(addr.sun_path, ep.path.c_str(), sizeof(addr.sun_path) - 1);
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
      throw std::runtime_error("cannot connect to " + ep.path);
    return fd;
  }
  Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
  if (!fd.valid()) throw std::runtime_error("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(ep.port));
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1)
    throw std::invalid_argument("bad IPv4 host: " + ep.host);
  if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    throw std::runtime_error("cannot connect to " + ep.host + ":" +
                             std::to_string(ep.port));
  return fd;
}

inline void write_all(int fd, std::string_view data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n <= 0) throw std::runtime_error("socket write failed");
    done += static_cast<std::size_t>(n);
  }
}

/// Reads up to and including the next '\n'. Empty return means EOF.
class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}

  std::string read_line() {
    std::string line;
    for (;;) {
      const auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        line = buf_.substr(0, nl + 1);
        buf_.erase(0, nl + 1);
        return line;
      }
      char chunk[4096];
      const ssize_t n = ::read(fd_, chunk, sizeof(chunk));
      if (n < 0) throw std::runtime_error("socket read failed");
      if (n == 0) {
        if (!buf_.empty())
          throw std::runtime_error("connection closed mid-message");
        return {};
      }
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buf_;
};

}  // namespace net

/// Generator backed by a remote inference server. Owns one connection;
/// exactly one request is in flight at a time.
class RemoteGenerator final : public Generator {
 public:
  explicit RemoteGenerator(std::string endpoint)
      : endpoint_(net::Endpoint::parse(endpoint)) {}

  GenerationResult generate(const std::string& prompt, const DecodeConfig& cfg,
                            int max_new_tokens, std::uint64_t seed) override {
    ensure_connected();
    BackendResponse res;
    try {
      net::write_all(fd_.get(), encode_request(
          BackendRequest{prompt, cfg, max_new_tokens, seed}));
      const std::string line = reader_->read_line();
      if (line.empty()) throw std::runtime_error("server closed the connection");
      res = decode_response(line);
    } catch (const std::exception& e) {
      fd_.reset();
      reader_.reset();
      throw std::runtime_error(std::string("external backend: ") + e.what());
    }
    if (!model_id_.empty() && res.model_id != model_id_)
      throw std::runtime_error("external backend changed model mid-run");
    model_id_ = res.model_id;
    return GenerationResult{std::move(res.text),
                            make_prob_vector(std::move(res.probs))};
  }

  std::string model_id() override {
    return model_id_.empty() ? "external" : model_id_;
  }

 private:
  void ensure_connected() {
    if (fd_.valid()) return;
    fd_ = net::connect_endpoint(endpoint_);
    reader_ = std::make_unique<net::LineReader>(fd_.get());
  }

  net::Endpoint endpoint_;
  net::Fd fd_;
  std::unique_ptr<net::LineReader> reader_;
  std::string model_id_;
};

inline GeneratorFactory remote_generator_factory(std::string endpoint) {
  return [endpoint = std::move(endpoint)]() -> std::unique_ptr<Generator> {
    return std::make_unique<RemoteGenerator>(endpoint);
  };
}

/// Hosts a TokenModel over the backend protocol: one model instance and one
/// handler thread per connection. Primarily lets the test suite and demo
/// setups exercise the exact protocol a real inference wrapper implements.
class BackendServer {
 public:
  BackendServer(const std::string& endpoint, TokenModelFactory factory)
      : factory_(std::move(factory)), endpoint_(net::Endpoint::parse(endpoint)) {
    listen_fd_ = bind_and_listen(endpoint_);
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  ~BackendServer() { stop(); }

  void stop() {
    bool expected = false;
    if (!stopping_.compare_exchange_strong(expected, true)) return;
    ::shutdown(listen_fd_.get(), SHUT_RDWR);
    listen_fd_.reset();
    if (accept_thread_.joinable()) accept_thread_.join();
    std::lock_guard lock(mu_);
    for (std::thread& t : handlers_)
      if (t.joinable()) t.join();
    handlers_.clear();
    if (endpoint_.is_unix) ::unlink(endpoint_.path.c_str());
  }

 private:
  static net::Fd bind_and_listen(const net::Endpoint& ep) {
    if (ep.is_unix) {
      ::unlink(ep.path.c_str());
      net::Fd fd(::socket(AF_UNIX, SOCK_STREAM, 0));
      if (!fd.valid()) throw std::runtime_error("socket() failed");
      sockaddr_un addr{};
      addr.sun_family = AF_UNIX;
      if (ep.path.size() >= sizeof(addr.sun_path))
        throw std::invalid_argument("unix socket path too long");
      std::strncpy(addr.sun_path, ep.path.c_str(), sizeof(addr.sun_path) - 1);
      if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw std::runtime_error("cannot bind " + ep.path);
      if (::listen(fd.get(), 16) != 0) throw std::runtime_error("listen failed");
      return fd;
    }
    net::Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd.valid()) throw std::runtime_error("socket() failed");
    const int one = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(ep.port));
    if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1)
      throw std::invalid_argument("bad IPv4 host: " + ep.host);
    if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
      throw std::runtime_error("cannot bind " + ep.host + ":" + std::to_string(ep.port));
    if (::listen(fd.get(), 16) != 0) throw std::runtime_error("listen failed");
    return fd;
  }

  void accept_loop() {
    for (;;) {
      const int conn = ::accept(listen_fd_.get(), nullptr, nullptr);
      if (conn < 0) return;  // listening socket closed by stop()
      std::lock_guard lock(mu_);
      handlers_.emplace_back([this, conn] { handle_connection(net::Fd(conn)); });
    }
  }

  void handle_connection(net::Fd conn) {
    try {
      const std::unique_ptr<TokenModel> model = factory_();
      net::LineReader reader(conn.get());
      for (;;) {
        const std::string line = reader.read_line();
        if (line.empty()) return;  // client done
        const BackendResponse res = serve_request(*model, decode_request(line));
        net::write_all(conn.get(), encode_response(res));
      }
    } catch (const std::exception&) {
      // drop the connection; the client surfaces the transport error
    }
  }

  TokenModelFactory factory_;
  net::Endpoint endpoint_;
  net::Fd listen_fd_;
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<std::thread> handlers_;
  std::atomic<bool> stopping_{false};
};

}  // namespace semalign
