#pragma once

#include <stdexcept>
#include <string>

namespace zson {

// Runtime failure: bad files, unreachable goals, numeric blowups. CLI maps
// these to exit code 2.
struct ZsonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: flags, config files, schema violations. Exit code 1.
// Derives from ZsonError so library callers can catch one type; the CLI
// catches ConfigError first to pick the exit code.
struct ConfigError : ZsonError {
  using ZsonError::ZsonError;
};

}  // namespace zson
