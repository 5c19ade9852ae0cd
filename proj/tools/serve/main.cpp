// Live service: paces a scenario in real time and exposes it over a websocket.
//
//   morphflow-serve --scenario jun28.json [--bind 127.0.0.1:8080] [--tps 30]
//                   [--log interaction.json] [--manifest manifest.json]
//                   [--max-ticks N] [--paused]

#include <csignal>
#include <iostream>

#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>
#include <CLI11.hpp>

#include "server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serve a running morphflow scenario over a websocket"};
  std::string scenario_path;
  std::string bind = "127.0.0.1:8080";
  double tps = 30.0;
  std::string log_path;
  std::string manifest_path;
  std::optional<std::uint64_t> max_ticks;
  bool paused = false;
  app.add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  app.add_option("--bind", bind, "host:port to listen on");
  app.add_option("--tps", tps, "Ticks per second")->check(CLI::Range(0.001, 1000.0));
  app.add_option("--log", log_path, "Write the interaction log here on shutdown");
  app.add_option("--manifest", manifest_path, "Write the run manifest here on shutdown");
  app.add_option("--max-ticks", max_ticks, "Stop ticking after this many ticks");
  app.add_flag("--paused", paused, "Start paused; advance with Step or Resume");
  CLI11_PARSE(app, argc, argv);

  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "morphflow-serve: --bind expects host:port\n";
    return 1;
  }

  try {
    morphflow::ServiceOptions options;
    options.pacing = {tps, paused, max_ticks};
    if (!log_path.empty()) options.log_path = log_path;
    if (!manifest_path.empty()) options.manifest_path = manifest_path;
    morphflow::LiveService service(morphflow::load_scenario(scenario_path), options);

    morphflow::serve::Server server(
        service, {bind.substr(0, colon), static_cast<unsigned short>(std::stoul(bind.substr(colon + 1)))});
    std::cout << "listening on " << bind.substr(0, colon) << ":" << server.port() << std::endl;

    boost::asio::io_context signals_ctx;
    boost::asio::signal_set signals(signals_ctx, SIGINT, SIGTERM);
    signals.async_wait([](const boost::system::error_code&, int) {});
    service.start();
    server.start(1);
    signals_ctx.run();

    server.stop();
    service.stop();
    std::cout << "stopped at tick " << service.hub().clock() << std::endl;
    return 0;
  } catch (const morphflow::Error& e) {
    std::cerr << "morphflow-serve: " << e.what() << "\n";
    return e.code() == morphflow::Errc::scenario || e.code() == morphflow::Errc::io ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "morphflow-serve: " << e.what() << "\n";
    return 2;
  }
}
