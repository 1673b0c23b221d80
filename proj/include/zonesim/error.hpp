#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace zonesim {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kValidation,
  kUnknownWorkstation,
  kNoFeasiblePath,
  kZoneViolation,
  kNotATip,
  kWouldDisconnect,
  kWouldEmptyZone,
  kZeroVelocity,
  kDimensionMismatch,
  kNoNeighbors,
  kInvalidMove,
  kInfeasibleStart,
  kOrphanPart,
  kDeadlock,
  kIo,
  kIncompatible,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Layout problem tied to one element of a layout section ("points",
// "segments", "workstations"); loaders translate it into a line number.
class LayoutError : public Error {
 public:
  LayoutError(std::string section, int index, const std::string& what)
      : Error(ErrorCode::kValidation, what), section_(std::move(section)), index_(index) {}

  const std::string& section() const noexcept { return section_; }
  int index() const noexcept { return index_; }

 private:
  std::string section_;
  int index_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace zonesim
