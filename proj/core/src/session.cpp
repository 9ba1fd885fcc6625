#include "apldf/session.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "apldf/error.hpp"
#include "apldf/metrics.hpp"
#include "apldf/planner.hpp"
#include "apldf/units.hpp"

namespace apldf {

using json = nlohmann::ordered_json;

namespace {

std::string error_msg(const std::string& code, const std::string& text) {
  return json{{"type", "error"}, {"code", code}, {"text", text}}.dump();
}

std::string ack(const std::string& of) { return json{{"type", "ack"}, {"of", of}}.dump(); }

}  // namespace

// -- RouteRegistry -------------------------------------------------------------

void RouteRegistry::add(RouteMap map) {
  auto name = map.name();
  routes_[name] = std::make_shared<const RouteMap>(std::move(map));
}

void RouteRegistry::load_directory(const std::filesystem::path& dir) {
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      // Only files that look like routes; other JSON (cohorts, scripts) is skipped.
      const auto text = read_text_file(entry.path());
      const auto doc = json::parse(text, nullptr, false);
      if (doc.is_discarded() || !doc.is_object() || !doc.contains("limit_zones")) continue;
      add(load_route(text));
    }
  }
}

std::shared_ptr<const RouteMap> RouteRegistry::find(const std::string& name) const {
  auto it = routes_.find(name);
  return it == routes_.end() ? nullptr : it->second;
}

std::vector<std::string> RouteRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : routes_) out.push_back(name);
  return out;
}

// -- Session ---------------------------------------------------------------------

Session::Session(std::string id, std::shared_ptr<const RouteRegistry> routes, SessionConfig config)
    : id_(std::move(id)), routes_(std::move(routes)), config_(std::move(config)) {}

Session::~Session() = default;

std::vector<std::string> Session::hello() const {
  return {json{{"type", "hello"},
               {"session_id", id_},
               {"routes", routes_->names()},
               {"route", route_ ? json(route_->name()) : json(nullptr)},
               {"iteration", learning_ ? json(learning_->iteration) : json(nullptr)}}
              .dump()};
}

std::vector<std::string> Session::handle(std::string_view message) {
  const json msg = json::parse(message, nullptr, false);
  if (msg.is_discarded() || !msg.is_object() || !msg.contains("type") ||
      !msg["type"].is_string()) {
    return {error_msg("bad_msg", "message must be a JSON object with a string 'type'")};
  }
  const std::string type = msg["type"].get<std::string>();
  try {
    if (type == "input") {
      if (!sim_) return {error_msg("no_lap", "no lap running")};
      held_.gas = msg.value("gas", 0.0);
      held_.brake = msg.value("brake", 0.0);
      return {ack(type)};
    }
    if (type == "lever") {
      if (!sim_) return {error_msg("no_lap", "no lap running")};
      const double delta = msg.at("delta_kmh").get<double>();
      const double steps = delta / 5.0;
      if (steps == 0.0 || steps != std::round(steps)) {
        return {error_msg("bad_msg", "delta_kmh must be a non-zero multiple of 5")};
      }
      if (!sim_->state().pldf_active) return {error_msg("pldf_inactive", "PLDF is not active")};
      sim_->adjust_set_speed(static_cast<int>(steps));
      return {ack(type)};
    }
    if (type == "reactivate") {
      if (!sim_) return {error_msg("no_lap", "no lap running")};
      if (held_.brake > 0.0 || sim_->state().brake > 0.0) {
        return {error_msg("brake_held", "release the brake before reactivating")};
      }
      sim_->reactivate_pldf();
      return {ack(type)};
    }
    if (type == "start_lap") return on_start_lap();
    if (type == "abort_lap") {
      if (!sim_) return {error_msg("no_lap", "no lap running")};
      abort_lap();
      return {ack(type)};
    }
    if (type == "apply_spaa") return on_apply_spaa();
    if (type == "reset_learning") return on_reset_learning();
    if (type == "load_route") return on_load_route(msg.at("name").get<std::string>());
  } catch (const json::exception& e) {
    return {error_msg("bad_msg", e.what())};
  }
  return {error_msg("bad_msg", "unknown message type '" + type + "'")};
}

std::vector<std::string> Session::on_load_route(const std::string& name) {
  if (sim_) return {error_msg("lap_running", "cannot change route during a lap")};
  auto route = routes_->find(name);
  if (!route) return {error_msg("unknown_route", "no route named '" + name + "'")};
  route_ = std::move(route);
  learning_ = IterationState::start(plan_base_profile(*route_, config_.params.planner));
  laps_.clear();
  pending_log_.reset();
  return {ack("load_route"), profile_message()};
}

std::vector<std::string> Session::on_start_lap() {
  if (!route_) return {error_msg("no_route", "load a route first")};
  if (sim_) return {error_msg("lap_running", "a lap is already running")};
  lap_profile_ = learning_->baseline;
  sim_ = std::make_unique<Simulation>(*route_, *lap_profile_, config_.params.sim,
                                      "iteration-" + std::to_string(learning_->iteration));
  held_ = {};
  ++lap_id_;
  last_tick_slot_ = 0;
  return {ack("start_lap"), tick_message()};
}

std::vector<std::string> Session::on_apply_spaa() {
  if (sim_) return {error_msg("lap_running", "wait for the lap to finish")};
  if (!route_) return {error_msg("no_route", "load a route first")};
  if (!pending_log_) return {error_msg("no_log", "no completed lap to learn from")};
  learning_ = apply_iteration(*learning_, laps_[*pending_log_], *route_, config_.params.spaa());
  pending_log_.reset();
  return {ack("apply_spaa"), profile_message()};
}

std::vector<std::string> Session::on_reset_learning() {
  if (sim_) return {error_msg("lap_running", "wait for the lap to finish")};
  if (!route_) return {error_msg("no_route", "load a route first")};
  learning_ = IterationState::start(plan_base_profile(*route_, config_.params.planner));
  pending_log_.reset();
  return {ack("reset_learning"), profile_message()};
}

std::vector<std::string> Session::advance() {
  std::vector<std::string> out;
  if (!sim_) return out;
  sim_->apply(held_);
  const double t = sim_->state().t;
  const auto slot = static_cast<long long>(std::floor(t * config_.client_tick_hz + 1e-9));
  if (slot > last_tick_slot_) {
    last_tick_slot_ = slot;
    out.push_back(tick_message());
  }
  const bool timed_out = t >= config_.params.sim.max_lap_time_s;
  if (sim_->finished() || timed_out) {
    DriveLog log = sim_->finish(!timed_out);
    sim_.reset();
    held_ = {};
    if (!log.complete) {
      out.push_back(error_msg("lap_incomplete", "lap exceeded the time limit"));
      return out;
    }
    const auto rates = intervention_rates(log);
    laps_.push_back(std::move(log));
    pending_log_ = laps_.size() - 1;
    out.push_back(json{{"type", "lap_done"},
                       {"lap_id", lap_id_},
                       {"rates", json::parse(rates_to_json(rates))}}
                      .dump());
  }
  return out;
}

void Session::abort_lap() {
  sim_.reset();
  held_ = {};
}

std::string Session::tick_message() const {
  const auto& s = sim_->state();
  return json{{"type", "tick"},
              {"t", s.t},
              {"d_m", s.d},
              {"v_kmh", mps_to_kmh(s.v)},
              {"target_kmh", mps_to_kmh(s.target_v)},
              {"limit_kmh", mps_to_kmh(s.active_limit)},
              {"offset_kmh", mps_to_kmh(s.set_speed_offset)},
              {"pldf_active", s.pldf_active},
              {"intervening", sim_->intervening()}}
      .dump();
}

std::string Session::profile_message() const {
  const auto& p = learning_->baseline;
  json points = json::array();
  for (std::size_t i = 0; i < p.size(); ++i) points.push_back({p.distance_at(i), mps_to_kmh(p[i])});
  return json{{"type", "profile"}, {"iteration", learning_->iteration}, {"points", std::move(points)}}
      .dump();
}

std::optional<std::string> Session::profile_csv(std::size_t iteration) const {
  if (!learning_) return std::nullopt;
  for (const auto& h : learning_->history) {
    if (h.iteration == iteration) return profile_to_csv(h.profile);
  }
  return std::nullopt;
}

std::string Session::history_json() const {
  if (!learning_) return json{{"session_id", id_}, {"route", nullptr}}.dump();
  json doc = json::parse(history_manifest_json(*learning_, config_.params));
  for (auto& entry : doc["iterations"]) {
    entry["profile"] = "/profile/" + std::to_string(entry["iteration"].get<std::size_t>());
  }
  doc["session_id"] = id_;
  doc["route"] = route_->name();
  auto& laps = doc["laps"] = json::array();
  for (const auto& log : laps_) laps.push_back(json::parse(rates_to_json(intervention_rates(log))));
  return doc.dump(2);
}

}  // namespace apldf
