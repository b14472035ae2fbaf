#include "agpnav/service.hpp"

#include "agpnav/error.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <deque>
#include <iostream>

namespace agpnav {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

// Outgoing messages beyond this backlog mean the client stopped reading.
constexpr std::size_t kMaxBacklog = 1024;

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, std::unique_ptr<Session> session,
             std::chrono::nanoseconds period)
      : ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        session_(std::move(session)),
        period_(period) {}

  void start() {
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->send(self->session_->snapshot());
      self->read();
      self->deadline_ = std::chrono::steady_clock::now() + self->period_;
      self->schedule();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->send(self->session_->handle(text));
      self->read();
    });
  }

  void schedule() {
    timer_.expires_at(deadline_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      if (auto msg = self->session_->tick()) self->send(std::move(*msg));
      // A late frame shifts the schedule instead of being skipped.
      self->deadline_ = std::max(self->deadline_ + self->period_, std::chrono::steady_clock::now());
      self->schedule();
    });
  }

  void send(std::string msg) {
    if (closed_) return;
    if (outbox_.size() >= kMaxBacklog) return close();
    outbox_.push_back(std::move(msg));
    if (outbox_.size() == 1) write();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return self->close();
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) self->write();
                    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    beast::error_code ec;
    beast::get_lowest_layer(ws_).close(ec);
  }

  websocket::stream<tcp::socket> ws_;
  asio::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::unique_ptr<Session> session_;
  std::chrono::nanoseconds period_;
  std::chrono::steady_clock::time_point deadline_;
  std::deque<std::string> outbox_;
  bool closed_ = false;
};

}  // namespace

struct Server::Impl {
  asio::io_context io{1};
  tcp::acceptor acceptor{io};
  SessionMaker make;
  std::chrono::nanoseconds period{};

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      try {
        std::make_shared<Connection>(std::move(socket), make(), period)->start();
      } catch (const std::exception& e) {
        std::cerr << "session failed to start: " << e.what() << '\n';
      }
      accept();
    });
  }
};

Server::Server(ServeOptions options, SessionMaker make) : impl_(std::make_unique<Impl>()) {
  if (!(options.fps > 0.0)) throw Error(ErrorKind::InvalidArgument, "fps must be positive");
  impl_->make = std::move(make);
  impl_->period = std::chrono::nanoseconds(std::int64_t(1e9 / options.fps));
  beast::error_code ec;
  const auto addr = asio::ip::make_address(options.address, ec);
  if (ec) throw Error(ErrorKind::InvalidArgument, "bad bind address '" + options.address + "'");
  const tcp::endpoint ep(addr, options.port);
  auto& a = impl_->acceptor;
  a.open(ep.protocol());
  a.set_option(asio::socket_base::reuse_address(true));
  a.bind(ep, ec);
  if (ec) throw Error(ErrorKind::InvalidArgument, "cannot bind " + options.address + ": " + ec.message());
  a.listen();
}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run(bool handle_signals) {
  std::optional<asio::signal_set> signals;
  if (handle_signals) {
    signals.emplace(impl_->io, SIGINT, SIGTERM);
    signals->async_wait([this](beast::error_code, int) { stop(); });
  }
  impl_->accept();
  impl_->io.run();
}

void Server::stop() {
  asio::post(impl_->io, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    impl_->io.stop();
  });
}

}  // namespace agpnav
