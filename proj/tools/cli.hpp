#pragma once

// Command-line front end. Each subcommand is a plain function so it can be
// driven from tests without going through argv.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace biphoton::cli {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::uint64_t shots = 10000;
  int threads = 1;
  std::string out_dir = ".";
  std::string format = "csv";  // csv | csv+svg
};

struct PurityOptions {
  std::vector<double> x{0.0, 0.15, 0.47};
  double gamma_max = 3.0;
  int gamma_steps = 61;
  double epsilon = 0.0;
};

struct DetectOptions {
  std::vector<double> x{0.0, 0.15, 0.5};
  double gamma_max = 2.0;
  int gamma_steps = 41;
  double ratio_gamma = 0.05;
};

struct GramOptions {
  double x_step = 0.002;
};

struct QptOptions {
  std::vector<double> x;  // empty: default grid
  std::vector<double> gamma{0.5, 1.5};
  int seeds = 10;
  int states = 40;
  int probes = 10;
  std::string scheme = "design";
  std::string ingest;  // ExperimentData JSON to reconstruct instead of sweeping
};

struct WignerOptions {
  double x = 0.47;
  std::vector<double> gamma{0.0, 1.5};
  int n_theta = 64;
  int n_phi = 128;
  double epsilon = 0.0;
  std::string input = "fiducial";  // fiducial | mixed
};

struct ChannelExportOptions {
  std::string kind = "jitter-exact";  // jitter-exact | jitter-mc | jitter-discrete | identity | depolarizer
  double gamma = 0.5;
  std::uint64_t samples = 100000;
  int k = 50;
  double data_x = -1.0;  // >= 0: also simulate ExperimentData with the design probe orbit of psi_x
};

struct CommandResult {
  std::vector<std::string> files;
  std::vector<std::string> summary;
  bool ok = true;  // internal validation assertions
};

CommandResult cmd_purity_curve(const GlobalOptions& g, const PurityOptions& o);
CommandResult cmd_detect(const GlobalOptions& g, const DetectOptions& o);
CommandResult cmd_gram(const GlobalOptions& g, const GramOptions& o);
CommandResult cmd_qpt(const GlobalOptions& g, const QptOptions& o);
CommandResult cmd_wigner(const GlobalOptions& g, const WignerOptions& o);
CommandResult cmd_channel_export(const GlobalOptions& g, const ChannelExportOptions& o);

/// Parses argv, runs one subcommand, prints its summary to `out`. Errors go
/// to `err` as a one-line JSON record. Exit codes: 0 ok, 1 internal failure,
/// 2 invalid input, 3 I/O.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace biphoton::cli
