#include <gtest/gtest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <string>

#include "morphflow/live.hpp"
#include "morphflow/scenario.hpp"
#include "server.hpp"

namespace morphflow {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

Scenario tiny() {
  return parse_scenario(json::parse(R"({
    "seed": 1, "ticks": 100000, "grid": {"width": 8, "height": 8},
    "main": "main",
    "templates": [{"name": "main", "vertices": [
      {"name": "img", "data": {"kind": "constant", "pattern": "disc"}},
      {"name": "wave", "data": {"kind": "dynamic", "transform": "wave", "click": [4, 4]}, "sources": ["img"]}
    ]}],
    "outputs": [{"vertex": "main/wave"}]
  })"));
}

class ServiceFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<LiveService>(tiny(), ServiceOptions{PacerOptions{200.0, true, std::nullopt}, {}, {}});
    service_->start();
    server_ = std::make_unique<serve::Server>(*service_, serve::ServerOptions{"127.0.0.1", 0});
    server_->start(1);
  }
  void TearDown() override {
    server_->stop();
    service_->stop();
  }

  json get(const std::string& target) {
    net::io_context ioc;
    tcp::socket sock(ioc);
    sock.connect({net::ip::make_address("127.0.0.1"), server_->port()});
    http::request<http::empty_body> req{http::verb::get, target, 11};
    req.set(http::field::host, "localhost");
    http::write(sock, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(sock, buf, res);
    EXPECT_EQ(res.result(), http::status::ok) << target;
    return json::parse(res.body());
  }

  std::unique_ptr<LiveService> service_;
  std::unique_ptr<serve::Server> server_;
};

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    ws_.next_layer().connect({net::ip::make_address("127.0.0.1"), port});
    ws_.handshake("localhost", "/session");
  }
  void send(const json& msg) { ws_.write(net::buffer(msg.dump())); }
  json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }
  /// Reads until a message of the given type arrives.
  json read_until(const std::string& type) {
    for (int i = 0; i < 1000; ++i) {
      json m = read();
      if (m.at("type") == type) return m;
    }
    throw std::runtime_error("no " + type + " message");
  }
  ~Client() {
    beast::error_code ec;
    ws_.close(websocket::close_code::normal, ec);
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

TEST_F(ServiceFixture, HttpEndpoints) {
  const json health = get("/health");
  EXPECT_EQ(health.at("status"), "ok");
  EXPECT_EQ(get("/scenario").at("seed"), 1);
}

TEST_F(ServiceFixture, SessionJoinStepAndClick) {
  Client c(server_->port());
  EXPECT_EQ(c.read().at("type"), "graph_snapshot");
  c.send({{"type", "step"}});
  const json frame = c.read_until("frame");
  EXPECT_EQ(frame.at("width"), 8);
  EXPECT_EQ(c.read_until("tick_advanced").at("tick"), 0);

  c.send({{"type", "click"}, {"vertex", "main/wave"}, {"x", 2}, {"y", 5}});
  c.send({{"type", "step"}});
  const json cs = c.read_until("control_state");
  EXPECT_EQ(cs.at("center"), json::array({2, 5}));
}

TEST_F(ServiceFixture, BadMessageAnsweredWithError) {
  Client c(server_->port());
  c.read();
  c.send({{"type", "warp"}});
  const json err = c.read_until("error");
  EXPECT_FALSE(err.at("code").get<std::string>().empty());
}

TEST_F(ServiceFixture, TwoClientsBothSeeTicks) {
  Client a(server_->port());
  Client b(server_->port());
  a.read();
  b.read();
  a.send({{"type", "step"}});
  EXPECT_EQ(a.read_until("tick_advanced").at("tick"), 0);
  EXPECT_EQ(b.read_until("tick_advanced").at("tick"), 0);
}

}  // namespace
}  // namespace morphflow
