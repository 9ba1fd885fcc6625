// pldf_serve: live session service for the cockpit.
//
//   pldf_serve [--port 8080] [--address 127.0.0.1] [--route-dir data] [--pace 1]
//
// --pace is simulated seconds per wall-clock second; 0 runs laps unpaced.

#include <csignal>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "apldf/io.hpp"
#include "apldf/server.hpp"
#include "apldf/session.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Adaptive PLDF live session server"};
  apldf::ServerConfig config;
  std::string route_dir = "data";
  std::string params_path;
  app.add_option("--port", config.port, "TCP port (0 = any free port)");
  app.add_option("--address", config.address, "Listen address");
  app.add_option("--route-dir", route_dir, "Directory of route JSON files");
  app.add_option("--pace", config.pace, "Simulated seconds per wall second, 0 = unpaced")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--resume-timeout", config.resume_timeout_s,
                 "Seconds a dropped session stays resumable");
  app.add_option("--params", params_path, "Parameter JSON (planner/spaa/sim)");
  CLI11_PARSE(app, argc, argv);

  try {
    auto routes = std::make_shared<apldf::RouteRegistry>();
    routes->load_directory(route_dir);
    if (routes->names().empty()) {
      std::cerr << "error: no routes in " << route_dir << '\n';
      return 2;
    }
    if (!params_path.empty()) {
      config.session.params = apldf::run_params_from_json(apldf::read_text_file(params_path));
    }

    // Block termination signals before any thread starts so only sigwait sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    apldf::Server server(config, routes);
    const auto port = server.start();
    std::cerr << "listening on " << config.address << ':' << port << " with "
              << routes->names().size() << " route(s)\n";
    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "shutting down\n";
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
