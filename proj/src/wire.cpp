#include "vmdiff/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace vmdiff {

namespace {

using nlohmann::json;

json cond_to_json(const ConditionBundle& cond) {
  json j;
  if (cond.is_scat()) {
    const ConcatEmbedding& c = cond.scat();
    j["mode"] = "scat";
    j["left"] = c.left.values;
    j["right"] = c.right.values;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
  } else {
    j["mode"] = "sinp";
    j["embedding"] = cond.sinp().values;
  }
  return j;
}

ConditionBundle cond_from_json(const json& j, const json& prompt) {
  ConditionBundle cond;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "scat") {
    ConcatEmbedding c;
    c.left = Embedding(j.at("left").get<std::vector<double>>());
    c.right = Embedding(j.at("right").get<std::vector<double>>());
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    cond.mode = std::move(c);
  } else if (mode == "sinp") {
    cond.mode = Embedding(j.at("embedding").get<std::vector<double>>());
  } else {
    throw std::runtime_error("unknown cond mode: " + mode);
  }
  cond.prompt = Embedding(prompt.get<std::vector<double>>());
  return cond;
}

json error_response(const std::string& message) { return json{{"error", message}}; }

void throw_if_error(const json& j, const char* op) {
  if (j.contains("error")) {
    throw BackendFailure(std::string("remote ") + op + ": " + j.at("error").get<std::string>());
  }
}

}  // namespace

namespace wire {

std::string encode_velocity_request(const Latent& x, int t, const ConditionBundle& cond,
                                    double guidance) {
  json j;
  j["op"] = "velocity";
  j["x"] = x.values;
  j["t"] = t;
  j["cond"] = cond_to_json(cond);
  j["prompt"] = cond.prompt.values;
  j["guidance"] = guidance;
  return j.dump();
}

std::string encode_decode_request(const Latent& x0) {
  return json{{"op", "decode"}, {"x", x0.values}}.dump();
}

std::string encode_image_request(const std::string& concept_id) {
  return json{{"op", "encode_image"}, {"concept", concept_id}}.dump();
}

std::string encode_prompt_request(const std::string& text) {
  return json{{"op", "encode_prompt"}, {"text", text}}.dump();
}

std::string encode_info_request() { return json{{"op", "info"}}.dump(); }

}  // namespace wire

std::string BackendServer::handle_line(const std::string& line) const {
  json req;
  try {
    req = json::parse(line);
  } catch (const std::exception& e) {
    return error_response(std::string("bad request json: ") + e.what()).dump();
  }

  try {
    const std::string op = req.at("op").get<std::string>();
    if (op == "velocity") {
      const Latent x(req.at("x").get<std::vector<double>>());
      const ConditionBundle cond = cond_from_json(req.at("cond"), req.at("prompt"));
      const Latent v = backend_.velocity(x, req.at("t").get<int>(), cond,
                                         req.at("guidance").get<double>());
      return json{{"v", v.values}}.dump();
    }
    if (op == "decode") {
      const Output out = backend_.decode(Latent(req.at("x").get<std::vector<double>>()));
      return json{{"point", out.point}, {"cloud", out.cloud}}.dump();
    }
    if (op == "encode_image") {
      const Embedding e = backend_.encode_image(req.at("concept").get<std::string>());
      return json{{"embedding", e.values}}.dump();
    }
    if (op == "encode_prompt") {
      const Embedding e = backend_.encode_prompt(req.at("text").get<std::string>());
      return json{{"embedding", e.values}}.dump();
    }
    if (op == "info") {
      return json{{"latent_dim", backend_.latent_dim()}}.dump();
    }
    return error_response("unknown op: " + op).dump();
  } catch (const std::exception& e) {
    return error_response(e.what()).dump();
  }
}

TcpTransport::TcpTransport(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  if (getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw BackendFailure("cannot resolve " + host + ":" + port_str);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0 || ::connect(fd_, res->ai_addr, res->ai_addrlen) != 0) {
    freeaddrinfo(res);
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    throw BackendFailure("cannot connect to " + host + ":" + port_str);
  }
  freeaddrinfo(res);
}

TcpTransport::~TcpTransport() {
  if (fd_ >= 0) ::close(fd_);
}

std::string TcpTransport::round_trip(const std::string& request_line) {
  std::string msg = request_line;
  msg.push_back('\n');
  std::size_t sent = 0;
  while (sent < msg.size()) {
    const ssize_t n = ::send(fd_, msg.data() + sent, msg.size() - sent, 0);
    if (n <= 0) throw BackendFailure("remote connection lost while sending");
    sent += static_cast<std::size_t>(n);
  }

  for (;;) {
    const std::size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n <= 0) throw BackendFailure("remote connection lost while receiving");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

RemoteBackend::RemoteBackend(std::unique_ptr<LineTransport> transport)
    : transport_(std::move(transport)) {
  const json j = json::parse(transport_->round_trip(wire::encode_info_request()));
  throw_if_error(j, "info");
  latent_dim_ = j.at("latent_dim").get<std::size_t>();
}

Latent RemoteBackend::velocity(const Latent& x, int t, const ConditionBundle& cond,
                               double guidance) const {
  const json j =
      json::parse(transport_->round_trip(wire::encode_velocity_request(x, t, cond, guidance)));
  throw_if_error(j, "velocity");
  return Latent(j.at("v").get<std::vector<double>>());
}

Output RemoteBackend::decode(const Latent& x0) const {
  const json j = json::parse(transport_->round_trip(wire::encode_decode_request(x0)));
  throw_if_error(j, "decode");
  Output out;
  out.point = j.at("point").get<std::vector<double>>();
  out.cloud = j.at("cloud").get<std::vector<std::vector<double>>>();
  return out;
}

Embedding RemoteBackend::encode_image(const std::string& concept_id) const {
  const json j = json::parse(transport_->round_trip(wire::encode_image_request(concept_id)));
  throw_if_error(j, "encode_image");
  return Embedding(j.at("embedding").get<std::vector<double>>());
}

Embedding RemoteBackend::encode_prompt(const std::string& text) const {
  const json j = json::parse(transport_->round_trip(wire::encode_prompt_request(text)));
  throw_if_error(j, "encode_prompt");
  return Embedding(j.at("embedding").get<std::vector<double>>());
}

std::unique_ptr<RemoteBackend> connect_remote(const std::string& address) {
  // address forms: "HOST:PORT" or "PORT"
  std::string host = "127.0.0.1";
  std::string port_str = address;
  const std::size_t colon = address.rfind(':');
  if (colon != std::string::npos) {
    host = address.substr(0, colon);
    port_str = address.substr(colon + 1);
  }
  int port = 0;
  try {
    port = std::stoi(port_str);
  } catch (const std::exception&) {
    throw BackendFailure("bad remote address: " + address);
  }
  return std::make_unique<RemoteBackend>(std::make_unique<TcpTransport>(host, port));
}

TcpBackendServer::TcpBackendServer(const VelocityBackend& backend) : server_(backend) {}

TcpBackendServer::~TcpBackendServer() { stop(); }

int TcpBackendServer::bind_and_listen(const std::string& host, int port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw BackendFailure("cannot create listening socket");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw BackendFailure("bad listen host: " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 1) != 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw BackendFailure("cannot bind/listen on " + host + ":" + std::to_string(port));
  }

  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  return static_cast<int>(ntohs(bound.sin_port));
}

void TcpBackendServer::serve() {
  while (!stopping_.load()) {
    const int client = ::accept(listen_fd_, nullptr, nullptr);
    if (client < 0) break;  // listening socket closed by stop()

    std::string buffer;
    char chunk[4096];
    for (;;) {
      const std::size_t nl = buffer.find('\n');
      if (nl != std::string::npos) {
        const std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        std::string resp = server_.handle_line(line);
        resp.push_back('\n');
        std::size_t sent = 0;
        bool write_ok = true;
        while (sent < resp.size()) {
          const ssize_t n = ::send(client, resp.data() + sent, resp.size() - sent, 0);
          if (n <= 0) {
            write_ok = false;
            break;
          }
          sent += static_cast<std::size_t>(n);
        }
        if (!write_ok) break;
        continue;
      }
      const ssize_t n = ::recv(client, chunk, sizeof(chunk), 0);
      if (n <= 0) break;  // client disconnected
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
    ::close(client);
  }
}

void TcpBackendServer::stop() {
  stopping_.store(true);
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

}  // namespace vmdiff
