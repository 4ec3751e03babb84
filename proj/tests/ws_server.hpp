#pragma once

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <functional>
#include <string>
#include <thread>

namespace haai::test {

/// Single-connection WebSocket server on an ephemeral loopback port. The
/// session callback runs on the server thread after the handshake.
class WsServer {
 public:
  using Stream = boost::beast::websocket::stream<boost::asio::ip::tcp::socket>;

  explicit WsServer(std::function<void(Stream&)> session)
      : acceptor_(ioc_, {boost::asio::ip::make_address("127.0.0.1"), 0}) {
    thread_ = std::thread([this, session = std::move(session)] {
      try {
        boost::asio::ip::tcp::socket socket(ioc_);
        acceptor_.accept(socket);
        Stream ws(std::move(socket));
        ws.accept();
        session(ws);
      } catch (const std::exception&) {
        // client went away
      }
    });
  }
  ~WsServer() {
    boost::system::error_code ec;
    acceptor_.close(ec);
    if (thread_.joinable()) thread_.join();
  }

  std::string address() const { return "127.0.0.1:" + std::to_string(acceptor_.local_endpoint().port()); }

 private:
  boost::asio::io_context ioc_;
  boost::asio::ip::tcp::acceptor acceptor_;
  std::thread thread_;
};

}  // namespace haai::test
