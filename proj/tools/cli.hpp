#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "selfieboost/boost.hpp"

namespace selfieboost::cli {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kIo = 2;
inline constexpr int kDegenerateData = 3;
inline constexpr int kBoostBreak = 4;
inline constexpr int kNumeric = 5;
inline constexpr int kUsage = 64;
}  // namespace exit_code

/// Bad flags or configuration; maps to exit code 64.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training run description. The JSON form mirrors BoostConfig:
///   {"algo": "selfieboost"|"adaboost"|"sgd", "data_path", "out_model",
///    "metrics_path", "threads", "rho", "T", "n", "seed", "init_scale",
///    "hidden_layers": [..], "activation", "weak_steps",
///    "sgd": {"steps", "lr", "batch", "checkpoints"},
///    "retry": {"max_retries", "sgd_growth", "widen_units", "lr_shrink"}}
/// Every key is optional; unknown keys are rejected.
struct ExperimentConfig {
  std::string algo = "selfieboost";
  std::string data_path;
  std::string out_model;
  std::string metrics_path;
  BoostConfig boost;  // boost.threads doubles as the experiment's thread count
  /// SGD steps per AdaBoost weak learner; boost.sgd.steps when unset.
  std::optional<std::size_t> weak_steps;
};

ExperimentConfig parse_experiment_config(std::string_view json_text);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace selfieboost::cli
