#pragma once

#include <stdexcept>
#include <string>

namespace runnerdna {

// Every failure the library can report, so callers and tests can match on
// the condition instead of parsing message text.
enum class Errc {
  MissingColumn,
  MalformedTimestamp,
  NonFiniteValue,
  TooShort,
  GapTooLarge,
  NonPositiveThreshold,
  SingularFit,
  DegenerateSeries,
  EmptyCohort,
  NonPositiveInterval,
  SingleClass,
  EmptyData,
  KeyMismatch,
  KTooLarge,
  NotTrainingSet,
  LengthMismatch,
  UnknownLabel,
  EmptyMatrix,
  DegeneratePooledVariance,
  TooFewSamples,
  DurationTooShort,
  InvalidSpec,
  InvalidArgument,
  IoFailure,
  ParseFailure,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::MalformedTimestamp: return "MalformedTimestamp";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::TooShort: return "TooShort";
    case Errc::GapTooLarge: return "GapTooLarge";
    case Errc::NonPositiveThreshold: return "NonPositiveThreshold";
    case Errc::SingularFit: return "SingularFit";
    case Errc::DegenerateSeries: return "DegenerateSeries";
    case Errc::EmptyCohort: return "EmptyCohort";
    case Errc::NonPositiveInterval: return "NonPositiveInterval";
    case Errc::SingleClass: return "SingleClass";
    case Errc::EmptyData: return "EmptyData";
    case Errc::KeyMismatch: return "KeyMismatch";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::NotTrainingSet: return "NotTrainingSet";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::DegeneratePooledVariance: return "DegeneratePooledVariance";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::DurationTooShort: return "DurationTooShort";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoFailure: return "IoFailure";
    case Errc::ParseFailure: return "ParseFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace runnerdna
