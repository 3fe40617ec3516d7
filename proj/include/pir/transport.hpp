#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace pir {

class TransportClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Blocking byte stream. read_exact fills the whole span or throws
// TransportClosed when the peer is gone.
class Stream {
 public:
  virtual ~Stream() = default;
  virtual void write(std::span<const std::uint8_t> bytes) = 0;
  virtual void read_exact(std::span<std::uint8_t> out) = 0;
  virtual void close() = 0;
};

// Connected pair of in-process streams, one per endpoint. Each direction is
// its own buffered channel, so a client thread and a server thread can talk
// without sockets.
std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_pipe();

// Counts raw bytes flowing through an underlying stream; the harness uses
// this to measure exact wire traffic.
class CountingStream : public Stream {
 public:
  explicit CountingStream(Stream& inner) : inner_(inner) {}

  void write(std::span<const std::uint8_t> bytes) override {
    inner_.write(bytes);
    written_ += bytes.size();
  }
  void read_exact(std::span<std::uint8_t> out) override {
    inner_.read_exact(out);
    read_ += out.size();
  }
  void close() override { inner_.close(); }

  std::uint64_t bytes_written() const { return written_; }
  std::uint64_t bytes_read() const { return read_; }

 private:
  Stream& inner_;
  std::uint64_t written_ = 0;
  std::uint64_t read_ = 0;
};

// addr is "host:port"; a missing host means 0.0.0.0 for listeners and
// 127.0.0.1 for clients.
class TcpListener {
 public:
  explicit TcpListener(const std::string& addr);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::unique_ptr<Stream> accept();
  std::uint16_t port() const { return port_; }
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::unique_ptr<Stream> tcp_connect(const std::string& addr);

}  // namespace pir
