#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace htc {

/// Exception carrying a stable machine-readable code alongside the human
/// message.  Codes are part of the CLI contract: the driver serializes them
/// verbatim into its JSON error output, so they must not be reworded.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string location = {})
      : std::runtime_error(message),
        code_(std::move(code)),
        location_(std::move(location)) {}

  const std::string& code() const noexcept { return code_; }

  /// Where the problem was found, e.g. "line 12" for file input.  Empty when
  /// the error is not tied to a location.
  const std::string& location() const noexcept { return location_; }

 private:
  std::string code_;
  std::string location_;
};

}  // namespace htc
