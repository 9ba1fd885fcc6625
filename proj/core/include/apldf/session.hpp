#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apldf/drive_sim.hpp"
#include "apldf/io.hpp"
#include "apldf/route_map.hpp"
#include "apldf/spaa.hpp"

namespace apldf {

/// Immutable-after-setup set of routes shared by all sessions.
class RouteRegistry {
 public:
  void add(RouteMap map);
  /// Loads every *.json file in the directory; throws on the first bad file.
  void load_directory(const std::filesystem::path& dir);
  std::shared_ptr<const RouteMap> find(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::shared_ptr<const RouteMap>> routes_;
};

struct SessionConfig {
  RunParams params;
  double client_tick_hz = 20.0;
};

/// One interactive driver: wire-protocol state machine around a simulation
/// and the driver's learning state. Not synchronized; the transport owns the
/// locking. Every method returns the JSON text messages to push to the client.
///
/// Client messages: input{gas,brake}, lever{delta_kmh}, reactivate,
/// start_lap, abort_lap, apply_spaa, reset_learning, load_route{name}.
/// Server messages: hello, ack{of}, tick, lap_done, profile, error{code,text}.
class Session {
 public:
  Session(std::string id, std::shared_ptr<const RouteRegistry> routes, SessionConfig config);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  std::vector<std::string> hello() const;

  std::vector<std::string> handle(std::string_view message);
  /// One simulation tick of the running lap; nothing when no lap runs.
  std::vector<std::string> advance();
  /// Drops a running lap (client gone); learning state is kept.
  void abort_lap();

  bool lap_running() const { return sim_ != nullptr; }
  double tick_dt() const { return config_.params.sim.dt; }
  const RouteMap* route() const { return route_.get(); }
  const IterationState* learning() const { return learning_ ? &*learning_ : nullptr; }
  const std::vector<DriveLog>& completed_laps() const { return laps_; }

  std::optional<std::string> profile_csv(std::size_t iteration) const;
  std::string history_json() const;

 private:
  std::vector<std::string> on_load_route(const std::string& name);
  std::vector<std::string> on_start_lap();
  std::vector<std::string> on_apply_spaa();
  std::vector<std::string> on_reset_learning();
  std::string tick_message() const;
  std::string profile_message() const;

  std::string id_;
  std::shared_ptr<const RouteRegistry> routes_;
  SessionConfig config_;
  std::shared_ptr<const RouteMap> route_;
  std::optional<IterationState> learning_;
  std::optional<SpeedProfile> lap_profile_;
  std::unique_ptr<Simulation> sim_;
  DriverInputs held_;
  std::size_t lap_id_ = 0;
  long long last_tick_slot_ = -1;
  std::vector<DriveLog> laps_;
  std::optional<std::size_t> pending_log_;  // completed lap not yet learned from
};

}  // namespace apldf
