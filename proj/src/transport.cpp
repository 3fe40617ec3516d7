#include "pir/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

namespace pir {

namespace {

// One direction of a pipe: an unbounded byte queue with EOF.
struct Channel {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> buf;
  bool closed = false;

  void write(std::span<const std::uint8_t> bytes) {
    std::lock_guard<std::mutex> lock(mu);
    if (closed) throw TransportClosed("pipe closed");
    buf.insert(buf.end(), bytes.begin(), bytes.end());
    cv.notify_all();
  }

  void read_exact(std::span<std::uint8_t> out) {
    std::size_t got = 0;
    std::unique_lock<std::mutex> lock(mu);
    while (got < out.size()) {
      cv.wait(lock, [&] { return !buf.empty() || closed; });
      if (buf.empty() && closed) throw TransportClosed("pipe closed");
      while (!buf.empty() && got < out.size()) {
        out[got++] = buf.front();
        buf.pop_front();
      }
    }
  }

  void close() {
    std::lock_guard<std::mutex> lock(mu);
    closed = true;
    cv.notify_all();
  }
};

class PipeStream : public Stream {
 public:
  PipeStream(std::shared_ptr<Channel> out, std::shared_ptr<Channel> in)
      : out_(std::move(out)), in_(std::move(in)) {}
  ~PipeStream() override { close(); }

  void write(std::span<const std::uint8_t> bytes) override { out_->write(bytes); }
  void read_exact(std::span<std::uint8_t> out) override { in_->read_exact(out); }
  void close() override {
    out_->close();
    in_->close();
  }

 private:
  std::shared_ptr<Channel> out_;
  std::shared_ptr<Channel> in_;
};

class FdStream : public Stream {
 public:
  explicit FdStream(int fd) : fd_(fd) {}
  ~FdStream() override { close(); }

  void write(std::span<const std::uint8_t> bytes) override {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
      ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportClosed("send: " + std::string(std::strerror(errno)));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  void read_exact(std::span<std::uint8_t> out) override {
    std::size_t got = 0;
    while (got < out.size()) {
      ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportClosed("recv: " + std::string(std::strerror(errno)));
      }
      if (n == 0) throw TransportClosed("connection closed");
      got += static_cast<std::size_t>(n);
    }
  }

  void close() override {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_ = -1;
};

std::pair<std::string, std::string> split_addr(const std::string& addr,
                                               const std::string& default_host) {
  const std::size_t colon = addr.rfind(':');
  if (colon == std::string::npos) {
    throw TransportError("address needs host:port, got '" + addr + "'");
  }
  std::string host = addr.substr(0, colon);
  std::string port = addr.substr(colon + 1);
  if (host.empty()) host = default_host;
  if (port.empty()) throw TransportError("missing port in '" + addr + "'");
  return {host, port};
}

}  // namespace

std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_pipe() {
  auto a_to_b = std::make_shared<Channel>();
  auto b_to_a = std::make_shared<Channel>();
  return {std::make_unique<PipeStream>(a_to_b, b_to_a),
          std::make_unique<PipeStream>(b_to_a, a_to_b)};
}

TcpListener::TcpListener(const std::string& addr) {
  auto [host, port] = split_addr(addr, "0.0.0.0");
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("resolve " + addr + ": " + gai_strerror(rc));
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(res);
    throw TransportError("socket: " + std::string(std::strerror(errno)));
  }
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, res->ai_addr, res->ai_addrlen) < 0 || ::listen(fd_, 16) < 0) {
    const std::string err = std::strerror(errno);
    ::freeaddrinfo(res);
    ::close(fd_);
    fd_ = -1;
    throw TransportError("bind " + addr + ": " + err);
  }
  ::freeaddrinfo(res);
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len) == 0) {
    port_ = ntohs(bound.sin_port);
  }
}

TcpListener::~TcpListener() { close(); }

std::unique_ptr<Stream> TcpListener::accept() {
  while (true) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return std::make_unique<FdStream>(fd);
    }
    if (errno == EINTR) continue;
    throw TransportClosed("accept: " + std::string(std::strerror(errno)));
  }
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::unique_ptr<Stream> tcp_connect(const std::string& addr) {
  auto [host, port] = split_addr(addr, "127.0.0.1");
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("resolve " + addr + ": " + gai_strerror(rc));
  }
  int fd = -1;
  std::string err = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      err = std::strerror(errno);
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    err = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("connect " + addr + ": " + err);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<FdStream>(fd);
}

}  // namespace pir
