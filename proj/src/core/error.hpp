#pragma once

#include <stdexcept>
#include <string>

namespace coxkern {

enum class ErrorCode {
  invalid_argument = 1,
  invalid_bandwidth,
  bandwidth_too_large,
  invalid_data,
  empty_data,
  lag_out_of_range,
  simulation_failure,
  io_failure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace coxkern
