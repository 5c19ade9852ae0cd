#include "server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <iostream>

namespace morphflow::serve {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, LiveService& service) : ws_(std::move(socket)), service_(service) {}

  void open(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    outbox_ = std::make_shared<Outbox>();
    std::weak_ptr<WsSession> weak = shared_from_this();
    outbox_->set_ready_callback([weak] {
      if (auto self = weak.lock()) net::post(self->ws_.get_executor(), [self] { self->pump(); });
    });
    client_ = service_.connect(outbox_);
    connected_ = true;
    pump();
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return close();
    service_.handle_text(client_, beast::buffers_to_string(buffer_.data()));
    buffer_.consume(buffer_.size());
    read();
  }

  void pump() {
    if (writing_ || !connected_) return;
    auto next = outbox_->try_pop();
    if (!next) return;
    writing_ = true;
    current_ = std::move(*next);
    ws_.async_write(net::buffer(*current_), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    current_.reset();
    if (ec) return close();
    pump();
  }

  void close() {
    if (!connected_) return;
    connected_ = false;
    service_.disconnect(client_);
    outbox_->set_ready_callback({});
  }

  websocket::stream<beast::tcp_stream> ws_;
  LiveService& service_;
  beast::flat_buffer buffer_;
  std::shared_ptr<Outbox> outbox_;
  Outbox::Payload current_;
  ClientId client_ = 0;
  bool writing_ = false;
  bool connected_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, LiveService& service) : stream_(std::move(socket)), service_(service) {}

  void start() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      if (req_.target() != "/session") return respond(http::status::not_found, R"({"error":"no such endpoint"})");
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), service_)->open(std::move(req_));
      return;
    }
    if (req_.method() != http::verb::get) return respond(http::status::method_not_allowed, R"({"error":"GET only"})");
    if (req_.target() == "/health") return respond(http::status::ok, service_.health().dump());
    if (req_.target() == "/scenario") return respond(http::status::ok, service_.scenario_document().dump());
    respond(http::status::not_found, R"({"error":"no such endpoint"})");
  }

  void respond(http::status status, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "morphflow-serve");
    res->set(http::field::content_type, "application/json");
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || !res->keep_alive()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  LiveService& service_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
  Impl(LiveService& s, const ServerOptions& o)
      : service(s), acceptor(ioc), work(net::make_work_guard(ioc)) {
    const tcp::endpoint endpoint(net::ip::make_address(o.address), o.port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen(net::socket_base::max_listen_connections);
    accept();
  }

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpSession>(std::move(socket), service)->start();
      accept();
    });
  }

  LiveService& service;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::executor_work_guard<net::io_context::executor_type> work;
  std::vector<std::thread> threads;
};

Server::Server(LiveService& service, ServerOptions options) : impl_(std::make_unique<Impl>(service, options)) {}

Server::~Server() { stop(); }

unsigned short Server::port() const noexcept { return impl_->acceptor.local_endpoint().port(); }

void Server::start(std::size_t threads) {
  for (std::size_t i = 0; i < threads; ++i) impl_->threads.emplace_back([this] { impl_->ioc.run(); });
}

void Server::run() { impl_->ioc.run(); }

void Server::stop() {
  if (!impl_) return;
  net::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  impl_->work.reset();
  impl_->ioc.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->threads.clear();
}

}  // namespace morphflow::serve
