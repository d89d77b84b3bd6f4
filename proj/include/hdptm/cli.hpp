#pragma once

#include <cstdint>
#include <string>

namespace hdptm {

// Every option of a command with defaults expanded; mirrors the CLI flags.
struct RunConfig {
  std::string command;
  std::string corpus_path;
  std::string format = "plain";
  std::string algorithm = "pcsvb0";
  std::string algorithms = "pcsvb0,scvb0,pcvb0";
  std::string output_dir = "out";
  std::string model_path;

  std::uint32_t T = 200;
  std::uint32_t scvb_k = 50;
  double scvb_alpha = 0.1;
  double beta = 0.01;
  double alpha0 = 1.0;
  double gamma0 = 1.0;

  double rho_c_s = 10.0, rho_c_tau = 1000.0;
  double rho_d_s = 1.0, rho_d_tau = 10.0;
  double rho_h_s = 5.0, rho_h_tau = 100.0;
  double kappa = 0.9;

  std::uint32_t epochs = 30;
  double train_fraction = 0.8;
  double estimation_fraction = 0.7;
  std::uint32_t passes = 20;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool no_hyper_updates = false;
  bool no_timing = false;
};

// The resolved configuration as a key=value block; keys match the long
// option names, so the block can be fed back through --config.
std::string emit_config_echo(const RunConfig& config);

// exit codes: 0 success, 1 runtime failure, 2 usage or validation failure
int parse_and_dispatch(int argc, const char* const* argv);

}  // namespace hdptm
