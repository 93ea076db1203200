#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "vmdiff/backend.hpp"

namespace vmdiff {

// Newline-delimited JSON protocol for plugging a backend over a byte stream.
// Requests (one object per line):
//   {"op":"velocity","x":[...],"t":650,"cond":{...},"prompt":[...],"guidance":5.0}
//   {"op":"decode","x":[...]}
//   {"op":"encode_image","concept":"A"}
//   {"op":"encode_prompt","text":"..."}
//   {"op":"info"}
// cond is {"mode":"scat","left":[...],"right":[...],"beta1":..,"beta2":..}
// or {"mode":"sinp","embedding":[...]}. Responses: {"v":[...]},
// {"point":[...],"cloud":[[...]]}, {"embedding":[...]}, {"latent_dim":N},
// or {"error":"..."}.
namespace wire {

std::string encode_velocity_request(const Latent& x, int t, const ConditionBundle& cond,
                                    double guidance);
std::string encode_decode_request(const Latent& x0);
std::string encode_image_request(const std::string& concept_id);
std::string encode_prompt_request(const std::string& text);
std::string encode_info_request();

}  // namespace wire

// Serves protocol requests against an in-process backend. Transport-agnostic:
// one request line in, one response line out (newline not included).
class BackendServer {
 public:
  explicit BackendServer(const VelocityBackend& backend) : backend_(backend) {}

  std::string handle_line(const std::string& line) const;

 private:
  const VelocityBackend& backend_;
};

// One request/response exchange over some byte stream.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual std::string round_trip(const std::string& request_line) = 0;
};

// In-process stub transport: requests are dispatched straight into a
// BackendServer. Exercises the full encode/decode path without sockets.
class LoopbackTransport : public LineTransport {
 public:
  explicit LoopbackTransport(const VelocityBackend& backend) : server_(backend) {}

  std::string round_trip(const std::string& request_line) override {
    return server_.handle_line(request_line);
  }

 private:
  BackendServer server_;
};

// Blocking TCP client transport ("remote:host:port").
class TcpTransport : public LineTransport {
 public:
  TcpTransport(const std::string& host, int port);
  ~TcpTransport() override;

  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  std::string round_trip(const std::string& request_line) override;

 private:
  int fd_ = -1;
  std::string buffer_;
};

// VelocityBackend implemented over the wire protocol.
class RemoteBackend : public VelocityBackend {
 public:
  explicit RemoteBackend(std::unique_ptr<LineTransport> transport);

  std::size_t latent_dim() const override { return latent_dim_; }
  Latent velocity(const Latent& x, int t, const ConditionBundle& cond,
                  double guidance) const override;
  Output decode(const Latent& x0) const override;
  Embedding encode_image(const std::string& concept_id) const override;
  Embedding encode_prompt(const std::string& text) const override;

 private:
  std::unique_ptr<LineTransport> transport_;
  std::size_t latent_dim_ = 0;
};

// Parse "remote:HOST:PORT" / "remote:PORT" (host defaults to 127.0.0.1).
std::unique_ptr<RemoteBackend> connect_remote(const std::string& address);

// Minimal blocking TCP server hosting a backend; one client at a time.
class TcpBackendServer {
 public:
  explicit TcpBackendServer(const VelocityBackend& backend);
  ~TcpBackendServer();

  // Binds and listens; port 0 picks a free port. Returns the bound port.
  int bind_and_listen(const std::string& host, int port);
  // Accept/serve loop; returns after stop() closes the listening socket.
  void serve();
  void stop();

 private:
  BackendServer server_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
};

}  // namespace vmdiff
