#pragma once

#include <ostream>
#include <string>

#include "geoquery/common/errors.hpp"
#include "run_config.hpp"

namespace geoquery::cli {

/// Bad invocation: missing paths, contradictory parameters.
class UsageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A warning promoted to an error by --strict.
class StrictModeError : public DataError {
 public:
  using DataError::DataError;
};

class Context {
 public:
  Context(RunConfig config, std::string command, std::ostream& out, std::ostream& err)
      : config(std::move(config)), command(std::move(command)), out(out), err(err) {}

  RunConfig config;
  std::string command;
  std::ostream& out;
  std::ostream& err;

  /// Fixes the config hash and logs the resolved config. Call once the
  /// command has filled in everything it derives from its inputs.
  void begin();
  const std::string& hash() const { return hash_; }
  /// Logged normally; thrown as StrictModeError under --strict.
  void warn(const std::string& message);

 private:
  std::string hash_;
};

void cmd_partition(Context& ctx);
void cmd_train(Context& ctx);
void cmd_eval(Context& ctx);
void cmd_predict(Context& ctx);
void cmd_sample(Context& ctx);
void cmd_bias(Context& ctx);
void cmd_synth(Context& ctx);

}  // namespace geoquery::cli
