#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rotorwalk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kStepCapEnv = "ROTORWALK_STEP_CAP";
inline constexpr long long kDefaultStepCap = 10'000'000;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step cap used when --steps is absent: the environment override if set,
/// otherwise kDefaultStepCap. Throws UsageError on a malformed override.
long long default_step_cap(const char* env_value);

/// Parses "0.1,0.5,0.9"; throws UsageError on empty or malformed input.
std::vector<double> parse_grid(const std::string& text);

/// Entry point; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rotorwalk::cli
