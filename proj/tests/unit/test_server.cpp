#include <gtest/gtest.h>

#include <chrono>
#include <sstream>
#include <thread>
#include <string>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "apldf/io.hpp"
#include "apldf/server.hpp"
#include "apldf/units.hpp"
#include "fixtures.hpp"

using namespace apldf;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json = nlohmann::json;

namespace {

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto reg = std::make_shared<RouteRegistry>();
    reg->load_directory(fixtures::data_dir());
    ServerConfig cfg;
    cfg.port = 0;
    cfg.pace = 50.0;
    server_ = std::make_unique<Server>(cfg, reg);
    port_ = server_->start();
  }
  void TearDown() override { server_->stop(); }

  http::response<http::string_body> get(const std::string& target,
                                        http::verb verb = http::verb::get) {
    net::io_context ioc;
    beast::tcp_stream stream(ioc);
    stream.connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port_));
    http::request<http::string_body> req{verb, target, 11};
    req.set(http::field::host, "127.0.0.1");
    http::write(stream, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(stream, buf, res);
    beast::error_code ec;
    stream.socket().shutdown(tcp::socket::shutdown_both, ec);
    return res;
  }

  std::unique_ptr<Server> server_;
  unsigned short port_ = 0;
};

struct WsClient {
  net::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};

  WsClient(unsigned short port, const std::string& target) {
    ws.next_layer().connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
    ws.handshake("127.0.0.1", target);
  }
  void send(const json& j) { ws.write(net::buffer(j.dump())); }
  json recv() {
    beast::flat_buffer buf;
    ws.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }
  // Reads until a message of the given type; ticks are passed to on_tick.
  template <class F>
  json until(const std::string& type, F&& on_tick) {
    for (;;) {
      auto j = recv();
      if (j["type"] == type) return j;
      if (j["type"] == "tick") on_tick(j);
      if (j["type"] == "error") ADD_FAILURE() << j.dump();
    }
  }
  json until(const std::string& type) {
    return until(type, [](const json&) {});
  }
  void close() { ws.close(websocket::close_code::normal); }
};

std::vector<double> csv_kmh(const std::string& csv) {
  const auto p = profile_from_csv(csv);
  std::vector<double> out;
  for (std::size_t i = 0; i < p.size(); ++i) out.push_back(mps_to_kmh(p[i]));
  return out;
}

}  // namespace

TEST_F(ServerTest, HttpEndpoints) {
  auto routes = get("/routes");
  ASSERT_EQ(routes.result(), http::status::ok);
  const auto doc = json::parse(routes.body());
  EXPECT_NE(doc.dump().find("demo"), std::string::npos);
  EXPECT_NE(doc.dump().find("two_drop"), std::string::npos);
  EXPECT_EQ(get("/history").result(), http::status::not_found);  // no session yet
  EXPECT_EQ(get("/nope").result(), http::status::not_found);
  EXPECT_EQ(get("/routes", http::verb::post).result(), http::status::method_not_allowed);
}

TEST_F(ServerTest, LapLearnAndFetch) {
  WsClient c(port_, "/session");
  const auto hello = c.recv();
  ASSERT_EQ(hello["type"], "hello");
  const std::string id = hello["session_id"];
  EXPECT_FALSE(hello["resumed"].get<bool>());

  c.send({{"type", "load_route"}, {"name", "two_drop"}});
  const auto base = c.until("profile");
  EXPECT_EQ(base["iteration"], 0);

  c.send({{"type", "start_lap"}});
  bool pressed = false, released = false;
  double last_t = -1;
  const auto done = c.until("lap_done", [&](const json& t) {
    EXPECT_GT(t["t"].get<double>(), last_t);
    last_t = t["t"];
    const double d = t["d_m"];
    if (!pressed && d > 400) {
      c.send({{"type", "input"}, {"gas", 0.4}, {"brake", 0.0}});
      pressed = true;
    } else if (pressed && !released && d > 500) {
      c.send({{"type", "input"}, {"gas", 0.0}, {"brake", 0.0}});
      released = true;
    }
  });
  EXPECT_GT(done["rates"]["pedal_ir"].get<double>(), 0.0);

  c.send({{"type", "apply_spaa"}});
  const auto learned = c.until("profile");
  EXPECT_EQ(learned["iteration"], 1);

  const auto csv1 = get("/profile/1?session=" + id);
  ASSERT_EQ(csv1.result(), http::status::ok);
  const auto v1 = csv_kmh(csv1.body());
  ASSERT_EQ(v1.size(), learned["points"].size());
  for (std::size_t i = 0; i < v1.size(); ++i) {
    EXPECT_NEAR(learned["points"][i][1].get<double>(), v1[i], 1e-9);
  }
  const auto v0 = csv_kmh(get("/profile/0").body());
  EXPECT_NE(v0, v1);
  EXPECT_EQ(get("/profile/7").result(), http::status::not_found);
  EXPECT_EQ(get("/history?session=zzz").result(), http::status::not_found);

  const auto hist = json::parse(get("/history?session=" + id).body());
  EXPECT_EQ(hist["iterations"].size(), 2u);
  c.close();
}

TEST_F(ServerTest, ResumeKeepsLearningState) {
  std::string id;
  {
    WsClient c(port_, "/session");
    id = c.recv()["session_id"];
    c.send({{"type", "load_route"}, {"name", "two_drop"}});
    c.until("profile");
    c.close();
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(200));  // server sees the close
  WsClient again(port_, "/session?resume=" + id);
  const auto hello = again.recv();
  EXPECT_TRUE(hello["resumed"].get<bool>());
  EXPECT_EQ(hello["session_id"], id);
  EXPECT_EQ(hello["route"], "two_drop");
  EXPECT_EQ(hello["iteration"], 0);

  WsClient fresh(port_, "/session?resume=unknown");
  const auto h2 = fresh.recv();
  EXPECT_FALSE(h2["resumed"].get<bool>());
  EXPECT_NE(h2["session_id"], id);
  again.close();
  fresh.close();
}
