#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include "haai/log.hpp"

#include "haai/error.hpp"
#include "haai/io/adapters.hpp"

namespace haai::io {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Stream = websocket::stream<tcp::socket>;

namespace {

std::unique_ptr<Stream> connect(net::io_context& ioc, const std::string& address) {
  Address a = parse_address(address);
  try {
    tcp::resolver resolver(ioc);
    auto ws = std::make_unique<Stream>(ioc);
    net::connect(ws->next_layer(), resolver.resolve(a.host, a.port));
    ws->handshake(a.host + ":" + a.port, a.path);
    ws->text(true);
    return ws;
  } catch (const beast::system_error& e) {
    throw Error(ErrorCode::ConnectFailed, address + ": " + e.code().message());
  }
}

}  // namespace

// -- ws-in ------------------------------------------------------------------

struct WsSource::Impl {
  std::string address;
  net::io_context ioc;
  std::unique_ptr<Stream> ws;
  beast::flat_buffer buffer;
  EventQueue* queue = nullptr;
  std::thread thread;
};

WsSource::WsSource(std::string address) : SourceAdapter(address), impl_(std::make_unique<Impl>()) {
  impl_->address = std::move(address);
}

WsSource::~WsSource() { stop(); }

void WsSource::start(EventQueue& queue) {
  Impl& m = *impl_;
  m.queue = &queue;
  m.ws = connect(m.ioc, m.address);

  // Read loop; every callback runs on the adapter thread.
  auto read = std::make_shared<std::function<void()>>();
  *read = [this, &m, read] {
    m.ws->async_read(m.buffer, [this, &m, read](beast::error_code ec, std::size_t) {
      if (ec) {
        if (ec != websocket::error::closed && ec != net::error::operation_aborted) {
          log().warn("ws-in {}: {}", m.address, ec.message());
        }
        return;
      }
      std::string text = beast::buffers_to_string(m.buffer.data());
      m.buffer.consume(m.buffer.size());
      try {
        m.queue->push(key_, decode_payload(text));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::QueueClosed) return;
        log().warn("ws-in {}: dropped frame: {}", m.address, e.what());
      }
      (*read)();
    });
  };
  (*read)();
  m.thread = std::thread([this, &m, read] {
    m.ioc.run();
    *read = nullptr;
    finished_ = true;
  });
}

void WsSource::stop() {
  Impl& m = *impl_;
  if (!m.thread.joinable()) return;
  net::post(m.ioc, [&m] {
    beast::error_code ec;
    m.ws->next_layer().shutdown(tcp::socket::shutdown_both, ec);
    m.ws->next_layer().close(ec);
  });
  m.thread.join();
}

// -- ws-out -----------------------------------------------------------------

struct WsSink::Impl {
  net::io_context ioc;
  std::unique_ptr<Stream> ws;
};

WsSink::WsSink(std::string address) : impl_(std::make_unique<Impl>()), address_(std::move(address)) {}

WsSink::~WsSink() { stop(); }

void WsSink::start() {
  impl_->ws = connect(impl_->ioc, address_);
  worker_ = std::thread([this] { run(); });
}

void WsSink::deliver(const Value& value) {
  std::string frame = encode_payload(value);
  std::unique_lock lk(mu_);
  if (pending_.size() >= kCapacity) {
    log().warn("ws-out {}: {} frames pending, waiting", address_, pending_.size());
    if (!cv_.wait_for(lk, std::chrono::milliseconds(100), [&] { return pending_.size() < kCapacity || stopping_; })) {
      ++dropped_;
      log().warn("ws-out {}: delivery queue full, frame dropped", address_);
      return;
    }
  }
  pending_.push_back(std::move(frame));
  cv_.notify_all();
}

void WsSink::run() {
  for (;;) {
    std::string frame;
    {
      std::unique_lock lk(mu_);
      cv_.wait(lk, [&] { return !pending_.empty() || stopping_; });
      if (pending_.empty()) return;
      frame = std::move(pending_.front());
      pending_.pop_front();
    }
    cv_.notify_all();
    bool sent = false;
    for (int attempt = 1; attempt <= kAttempts && !sent; ++attempt) {
      try {
        if (!impl_->ws) impl_->ws = connect(impl_->ioc, address_);
        impl_->ws->write(net::buffer(frame));
        sent = true;
      } catch (const std::exception& e) {
        log().warn("ws-out {}: attempt {} failed: {}", address_, attempt, e.what());
        impl_->ws.reset();
      }
    }
    if (!sent) {
      ++dropped_;
      log().error("{}: ws-out {}: frame dropped after {} attempts", to_string(ErrorCode::WriteFailed), address_,
                    kAttempts);
    }
  }
}

void WsSink::stop() {
  {
    std::lock_guard lk(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
  if (impl_->ws) {
    beast::error_code ec;
    impl_->ws->close(websocket::close_code::normal, ec);
    impl_->ws.reset();
  }
}

}  // namespace haai::io
