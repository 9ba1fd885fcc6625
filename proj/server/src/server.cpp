#include "apldf/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/executor_work_guard.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

namespace apldf {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

struct Target {
  std::string path;
  std::map<std::string, std::string> query;
};

Target parse_target(std::string_view target) {
  Target t;
  const auto q = target.find('?');
  t.path = std::string(target.substr(0, q));
  if (q == std::string_view::npos) return t;
  std::string_view rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const auto part = rest.substr(0, amp);
    const auto eq = part.find('=');
    if (eq != std::string_view::npos) {
      t.query[std::string(part.substr(0, eq))] = std::string(part.substr(eq + 1));
    } else if (!part.empty()) {
      t.query[std::string(part)] = "";
    }
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return t;
}

Target parse_target(beast::string_view target) {
  return parse_target(std::string_view(target.data(), target.size()));
}

bool is_tick(const std::string& msg) { return msg.rfind(R"({"type":"tick")", 0) == 0; }

}  // namespace

class WsConnection;

// A live or detached session plus its simulation pump.
struct SessionSlot {
  SessionSlot(std::string id, std::shared_ptr<const RouteRegistry> routes, SessionConfig config)
      : session(std::move(id), std::move(routes), std::move(config)) {}

  std::mutex mu;
  std::condition_variable_any wake;
  Session session;
  bool attached = false;
  Clock::time_point detached_at{};
  std::jthread pump;
};

struct Server::Impl {
  Impl(ServerConfig c, std::shared_ptr<const RouteRegistry> r)
      : config(std::move(c)), routes(std::move(r)), acceptor(net::make_strand(ioc)) {}

  ServerConfig config;
  std::shared_ptr<const RouteRegistry> routes;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
  std::vector<std::thread> threads;
  bool running = false;

  std::mutex registry_mu;
  std::map<std::string, std::shared_ptr<SessionSlot>> slots;
  std::string latest_id;
  std::uint64_t next_id = 1;

  void do_accept();
  std::shared_ptr<SessionSlot> attach(const std::string& resume_id, bool& resumed);
  void detach(const std::shared_ptr<SessionSlot>& slot);
  void start_pump(const std::shared_ptr<SessionSlot>& slot, std::weak_ptr<WsConnection> conn);
  std::shared_ptr<SessionSlot> lookup(const std::map<std::string, std::string>& query);
  void purge_expired_locked();
  http::response<http::string_body> handle_http(const http::request<http::string_body>& req);
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, Server::Impl& server)
      : ws_(std::move(socket)), server_(server) {}

  void start(http::request<http::string_body> req) {
    const auto target = parse_target(req.target());
    const auto it = target.query.find("resume");
    resume_id_ = it == target.query.end() ? "" : it->second;
    beast::get_lowest_layer(ws_).expires_never();
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

  // Thread-safe: hops onto the connection's strand.
  void send(std::vector<std::string> msgs) {
    if (msgs.empty()) return;
    net::post(ws_.get_executor(),
              [self = shared_from_this(), msgs = std::move(msgs)]() mutable {
                for (auto& m : msgs) self->enqueue(std::move(m));
              });
  }

 private:
  struct Outgoing {
    std::string text;
    bool tick = false;
  };

  void on_accept(beast::error_code ec) {
    if (ec) return;
    bool resumed = false;
    slot_ = server_.attach(resume_id_, resumed);
    std::vector<std::string> greeting;
    {
      std::lock_guard lock(slot_->mu);
      greeting = slot_->session.hello();
    }
    auto doc = nlohmann::ordered_json::parse(greeting.front());
    doc["resumed"] = resumed;
    greeting.front() = doc.dump();
    for (auto& m : greeting) enqueue(std::move(m));
    server_.start_pump(slot_, weak_from_this());
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;  // an in-flight write still owns queue_.front()
      if (slot_) server_.detach(slot_);
      slot_.reset();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    std::vector<std::string> replies;
    {
      std::lock_guard lock(slot_->mu);
      replies = slot_->session.handle(text);
    }
    slot_->wake.notify_all();
    for (auto& m : replies) enqueue(std::move(m));
    do_read();
  }

  void enqueue(std::string msg) {
    if (closed_) return;
    const bool tick = is_tick(msg);
    if (tick && queued_ticks_ >= server_.config.max_queued_ticks) {
      // Latest wins: drop the oldest tick that is not being written.
      const std::size_t first = writing_ ? 1 : 0;
      for (std::size_t i = first; i < queue_.size(); ++i) {
        if (queue_[i].tick) {
          queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(i));
          --queued_ticks_;
          break;
        }
      }
    }
    if (tick) ++queued_ticks_;
    queue_.push_back({std::move(msg), tick});
    if (!writing_) do_write();
  }

  void do_write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front().text),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec || queue_.empty()) {
      queue_.clear();
      queued_ticks_ = 0;
      return;
    }
    if (queue_.front().tick) --queued_ticks_;
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  Server::Impl& server_;
  beast::flat_buffer buffer_;
  std::string resume_id_;
  std::shared_ptr<SessionSlot> slot_;
  std::deque<Outgoing> queue_;
  std::size_t queued_ticks_ = 0;
  bool writing_ = false;
  bool closed_ = false;
};

namespace {

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, Server::Impl& server)
      : stream_(std::move(socket)), server_(server) {}

  void start() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpConnection::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(req_) && parse_target(req_.target()).path == "/session") {
      std::make_shared<WsConnection>(stream_.release_socket(), server_)->start(std::move(req_));
      return;
    }
    res_ = server_.handle_http(req_);
    http::async_write(stream_, res_,
                      beast::bind_front_handler(&HttpConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (res_.need_eof()) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    do_read();
  }

  beast::tcp_stream stream_;
  Server::Impl& server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  http::response<http::string_body> res_;
};

}  // namespace

void Server::Impl::do_accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec == net::error::operation_aborted) return;
    } else {
      std::make_shared<HttpConnection>(std::move(socket), *this)->start();
    }
    do_accept();
  });
}

void Server::Impl::purge_expired_locked() {
  const auto now = Clock::now();
  const auto timeout = std::chrono::duration<double>(config.resume_timeout_s);
  for (auto it = slots.begin(); it != slots.end();) {
    bool expired = false;
    {
      std::lock_guard lock(it->second->mu);
      expired = !it->second->attached && now - it->second->detached_at > timeout;
    }
    it = expired ? slots.erase(it) : std::next(it);
  }
}

std::shared_ptr<SessionSlot> Server::Impl::attach(const std::string& resume_id, bool& resumed) {
  std::lock_guard reg(registry_mu);
  purge_expired_locked();
  resumed = false;
  if (!resume_id.empty()) {
    auto it = slots.find(resume_id);
    if (it != slots.end()) {
      std::lock_guard lock(it->second->mu);
      if (!it->second->attached) {
        it->second->attached = true;
        resumed = true;
        latest_id = resume_id;
        return it->second;
      }
    }
  }
  const std::string id = "s" + std::to_string(next_id++);
  auto slot = std::make_shared<SessionSlot>(id, routes, config.session);
  slot->attached = true;
  slots[id] = slot;
  latest_id = id;
  return slot;
}

void Server::Impl::detach(const std::shared_ptr<SessionSlot>& slot) {
  slot->pump.request_stop();
  if (slot->pump.joinable() && slot->pump.get_id() != std::this_thread::get_id()) slot->pump.join();
  std::lock_guard lock(slot->mu);
  slot->session.abort_lap();
  slot->attached = false;
  slot->detached_at = Clock::now();
}

void Server::Impl::start_pump(const std::shared_ptr<SessionSlot>& slot,
                              std::weak_ptr<WsConnection> conn) {
  const double pace = config.pace;
  SessionSlot* s = slot.get();
  s->pump = std::jthread([s, conn = std::move(conn), pace](std::stop_token st) {
    auto next = Clock::now();
    while (!st.stop_requested()) {
      std::vector<std::string> out;
      {
        std::unique_lock lock(s->mu);
        if (!s->session.lap_running()) {
          s->wake.wait_for(lock, st, std::chrono::milliseconds(50),
                           [s] { return s->session.lap_running(); });
          next = Clock::now();
          continue;
        }
        out = s->session.advance();
        if (pace > 0.0) {
          next += std::chrono::duration_cast<Clock::duration>(
              std::chrono::duration<double>(s->session.tick_dt() / pace));
        }
      }
      if (!out.empty()) {
        if (auto c = conn.lock()) c->send(std::move(out));
      }
      if (pace > 0.0) {
        std::unique_lock lock(s->mu);
        s->wake.wait_until(lock, st, next, [] { return false; });
      }
    }
  });
}

std::shared_ptr<SessionSlot> Server::Impl::lookup(const std::map<std::string, std::string>& query) {
  std::lock_guard reg(registry_mu);
  const auto q = query.find("session");
  const std::string& id = q == query.end() ? latest_id : q->second;
  const auto it = slots.find(id);
  return it == slots.end() ? nullptr : it->second;
}

http::response<http::string_body> Server::Impl::handle_http(
    const http::request<http::string_body>& req) {
  http::response<http::string_body> res{http::status::ok, req.version()};
  res.keep_alive(req.keep_alive());
  res.set(http::field::server, "pldf_serve");
  const auto reply = [&](http::status status, std::string body, const char* type) {
    res.result(status);
    res.set(http::field::content_type, type);
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  };
  const auto not_found = [&](const std::string& what) {
    return reply(http::status::not_found, nlohmann::json{{"error", what}}.dump(), "application/json");
  };

  if (req.method() != http::verb::get) {
    return reply(http::status::method_not_allowed, R"({"error":"GET only"})", "application/json");
  }
  const Target target = parse_target(req.target());

  if (target.path == "/routes") {
    nlohmann::json doc{{"routes", nlohmann::json::array()}};
    for (const auto& name : routes->names()) {
      const auto map = routes->find(name);
      doc["routes"].push_back({{"name", name},
                               {"length_m", map->length()},
                               {"zones", map->zones().size()}});
    }
    return reply(http::status::ok, doc.dump(), "application/json");
  }

  if (target.path == "/history" || target.path.rfind("/profile/", 0) == 0) {
    const auto slot = lookup(target.query);
    if (!slot) return not_found("no such session");
    if (target.path == "/history") {
      std::lock_guard lock(slot->mu);
      return reply(http::status::ok, slot->session.history_json(), "application/json");
    }
    const std::string index = target.path.substr(std::string_view("/profile/").size());
    std::size_t iteration = 0;
    try {
      std::size_t used = 0;
      iteration = std::stoul(index, &used);
      if (used != index.size()) throw std::invalid_argument(index);
    } catch (const std::exception&) {
      return reply(http::status::bad_request, R"({"error":"iteration must be an integer"})",
                   "application/json");
    }
    std::optional<std::string> csv;
    {
      std::lock_guard lock(slot->mu);
      csv = slot->session.profile_csv(iteration);
    }
    if (!csv) return not_found("no such iteration");
    return reply(http::status::ok, std::move(*csv), "text/csv");
  }
  return not_found("unknown path " + target.path);
}

Server::Server(ServerConfig config, std::shared_ptr<const RouteRegistry> routes)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(routes))) {}

Server::~Server() { stop(); }

unsigned short Server::start() {
  auto& im = *impl_;
  const tcp::endpoint endpoint{net::ip::make_address(im.config.address), im.config.port};
  im.acceptor.open(endpoint.protocol());
  im.acceptor.set_option(net::socket_base::reuse_address(true));
  im.acceptor.bind(endpoint);
  im.acceptor.listen(net::socket_base::max_listen_connections);
  const auto port = im.acceptor.local_endpoint().port();
  im.work.emplace(im.ioc.get_executor());
  im.do_accept();
  const std::size_t n = im.config.io_threads == 0 ? 1 : im.config.io_threads;
  for (std::size_t i = 0; i < n; ++i) im.threads.emplace_back([&im] { im.ioc.run(); });
  im.running = true;
  return port;
}

void Server::stop() {
  auto& im = *impl_;
  if (!im.running) return;
  im.running = false;
  im.work.reset();
  im.ioc.stop();
  for (auto& t : im.threads) t.join();
  im.threads.clear();
  std::lock_guard reg(im.registry_mu);
  for (auto& [id, slot] : im.slots) {
    slot->pump.request_stop();
    if (slot->pump.joinable()) slot->pump.join();
    std::lock_guard lock(slot->mu);
    slot->session.abort_lap();
  }
}

}  // namespace apldf
