#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "volterra/kernels.hpp"
#include "volterra/kspa.hpp"
#include "volterra/selection.hpp"

namespace volterra::cli {

/// Parameters shared by every subcommand. Serializes to a plain
/// `key = value` text file; list values are comma separated.
struct RunConfig {
  std::string command;
  std::string input;
  std::string input2;
  std::string out = "out";
  std::string data_dir;
  std::string target = "all";

  int memory = 10;
  int order = 5;
  double lambda = 1e-8;
  std::string kernel = "sum";
  double sigma = 1.0;
  bool prescale = false;

  int folds = 5;
  double train_fraction = 0.8;
  std::vector<double> lambdas;
  std::vector<int> memories;
  std::vector<int> orders;

  std::uint64_t seed = 1;
  int runs = 100;
  std::size_t length = 100;
  std::vector<std::string> processes{"P1", "P2", "P3"};

  std::string transform = "abs";
  /// 0 leaves p-values unadjusted.
  int family_size = 0;

  bool operator==(const RunConfig&) const = default;

  KernelSpec kernel_spec() const;
  ErrorTransform error_transform() const;
  /// Search grid from the list fields, falling back to the defaults for any
  /// empty list.
  SearchGrid grid() const;
  void validate() const;
};

std::string to_text(const RunConfig& config);
RunConfig from_text(const std::string& text);
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& config, const std::string& path);

}  // namespace volterra::cli
