#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coriolis {

enum class ErrorKind {
  invalid_input,
  invalid_params,
  invalid_timestep,
  config,
  export_io,
  undefined_curvature,
  invalid_script,
  size,
  parameter,
  incomplete_data,
  undefined_delta,
  reference,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_params: return "invalid-params";
    case ErrorKind::invalid_timestep: return "invalid-timestep";
    case ErrorKind::config: return "config";
    case ErrorKind::export_io: return "export";
    case ErrorKind::undefined_curvature: return "undefined-curvature";
    case ErrorKind::invalid_script: return "invalid-script";
    case ErrorKind::size: return "size";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::incomplete_data: return "incomplete-data";
    case ErrorKind::undefined_delta: return "undefined-delta";
    case ErrorKind::reference: return "reference";
  }
  return "unknown";
}

/// Every recoverable failure in the library is reported as an Error carrying
/// a kind, so callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace coriolis
