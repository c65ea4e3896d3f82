#include "nxplay/error.hpp"

namespace nxplay {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotRectangular: return "NotRectangular";
    case ErrorCode::UnknownChar: return "UnknownChar";
    case ErrorCode::DuplicateSeatDigit: return "DuplicateSeatDigit";
    case ErrorCode::NonContiguousSeatDigits: return "NonContiguousSeatDigits";
    case ErrorCode::TooFewSeats: return "TooFewSeats";
    case ErrorCode::MissingStation: return "MissingStation";
    case ErrorCode::OpenBorder: return "OpenBorder";
    case ErrorCode::ActionCountMismatch: return "ActionCountMismatch";
    case ErrorCode::SeatOutOfRange: return "SeatOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::EvalEpisodesZero: return "EvalEpisodesZero";
    case ErrorCode::TooFewCheckpoints: return "TooFewCheckpoints";
    case ErrorCode::EmptyPopulation: return "EmptyPopulation";
    case ErrorCode::ManifestVersionMismatch: return "ManifestVersionMismatch";
    case ErrorCode::MissingWeightsFile: return "MissingWeightsFile";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::PopulationRequired: return "PopulationRequired";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SeedCollision: return "SeedCollision";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace nxplay
