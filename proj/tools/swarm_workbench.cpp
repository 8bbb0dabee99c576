#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <pthread.h>

#include <CLI11.hpp>

#include "swarm/error.hpp"
#include "swarm/mc2/service.hpp"
#include "swarm/workbench/config.hpp"
#include "swarm/workbench/experiments.hpp"

namespace {

using swarm::Error;
using swarm::ErrorCode;
namespace wb = swarm::workbench;

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kInvalidConfig = 2,
  kIoFailure = 3,
  kPortUnavailable = 4,
  kBadLexicon = 5,
  kUsage = 64,
};

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidConfig: return kInvalidConfig;
    case ErrorCode::IoFailure: return kIoFailure;
    case ErrorCode::PortUnavailable: return kPortUnavailable;
    case ErrorCode::BadLexicon: return kBadLexicon;
    default: return kFailure;
  }
}

int serve(const wb::ExperimentConfig& cfg) {
  wb::Fields f(cfg.params, "params");
  const auto service_cfg = wb::parse_serve(f, cfg);

  // Signals are collected by this thread only, after the service stops.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  swarm::mc2::HabitatService service(service_cfg);
  const int port = service.start();
  std::cout << "listening on " << service_cfg.host << ":" << port << std::endl;

  int sig = 0;
  sigwait(&stop_signals, &sig);
  service.stop();
  std::cout << "stopped after signal " << sig << std::endl;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swarm workbench: config-driven swarm experiments and the letter habitat service"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  for (auto kind : wb::kKinds) {
    auto* sub = app.add_subcommand(std::string(kind), "run a " + std::string(kind) + " experiment");
    sub->add_option("-c,--config", config_path, "experiment config (JSON) or a previous manifest.json")
        ->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("-o,--output-dir", output_dir, "override the config output_dir");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  try {
    wb::Overrides o;
    o.seed = seed;
    if (output_dir) o.output_dir = *output_dir;
    const auto cfg = wb::load_config_file(config_path, o);
    if (cfg.kind != kind) {
      wb::invalid("kind", "config is for '" + cfg.kind + "' but the subcommand is '" + kind + "'");
    }
    if (kind == "serve-habitat") return serve(cfg);
    const auto run = wb::run_experiment(cfg);
    std::cout << "wrote " << run.artifacts.size() << " artifacts to " << run.output_dir.string() << std::endl;
    return kOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kFailure;
  }
}
