#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nxplay {

enum class ErrorCode {
  // layout parsing
  NotRectangular,
  UnknownChar,
  DuplicateSeatDigit,
  NonContiguousSeatDigits,
  TooFewSeats,
  MissingStation,
  OpenBorder,
  // engine
  ActionCountMismatch,
  SeatOutOfRange,
  // policy
  DimensionMismatch,
  NonFiniteGradient,
  UnknownName,
  // population
  EvalEpisodesZero,
  TooFewCheckpoints,
  EmptyPopulation,
  ManifestVersionMismatch,
  MissingWeightsFile,
  ChecksumMismatch,
  MalformedFile,
  // training / evaluation
  PopulationRequired,
  InvalidConfig,
  SeedCollision,
  Io,
};

std::string_view to_string(ErrorCode code);

// Single exception type for every domain failure; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nxplay
