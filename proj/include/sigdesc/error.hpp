#pragma once

#include <stdexcept>
#include <string>

namespace sigdesc {

/// Raised for every contract violation in the pipeline: malformed input,
/// violated preconditions, corrupt model files.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model file written by an incompatible format or model version.
class VersionMismatch : public Error {
 public:
  VersionMismatch(const std::string& what_kind, long expected, long found)
      : Error(what_kind + " version mismatch: expected " +
              std::to_string(expected) + ", found " + std::to_string(found)),
        expected_(expected),
        found_(found) {}

  long expected() const { return expected_; }
  long found() const { return found_; }

 private:
  long expected_;
  long found_;
};

}  // namespace sigdesc
