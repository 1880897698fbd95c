#pragma once

#include <stdexcept>
#include <string>

namespace tiersim {

// Every failure the library can report, so callers can switch on identity
// instead of parsing message text.
enum class Errc {
  EmptyCluster,
  DuplicateNodeId,
  InvalidSpec,
  InvalidTransition,
  WindowNotCovered,
  MissingTrace,
  NoWindows,
  UnknownNode,
  NonMonotonicTimestamp,
  ParseError,
  IoError,
  NoCapacity,
  InfeasiblePlacement,
  TaskNotRunning,
  ScenarioInvalid,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tiersim
