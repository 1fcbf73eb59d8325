#pragma once

#include <stdexcept>
#include <string>

namespace sigverify {

enum class ErrorCode {
  // capture file parsing / dataset enumeration
  MalformedHeader,
  FieldCount,
  NonMonotoneTime,
  TooFewPoints,
  InvalidSignature,
  FilenameRule,
  EmptyDataset,
  // model persistence
  VersionMismatch,
  CorruptFile,
  IoFailure,
  // preprocessing
  DegenerateGeometry,
  DegenerateExtent,
  // feature learning
  PatchTooLarge,
  AlreadyRemoved,
  NumericalFailure,
  DimensionMismatch,
  DomainError,
  NonFinite,
  LineSearchFailure,
  // feature extraction
  ImageTooSmall,
  PoolTooFine,
  // one-class classification
  TooFewSamples,
  EmptyTraining,
  ThresholdUnset,
  // evaluation
  EmptyPool,
  InsufficientGenuine,
  // configuration
  ConfigError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace sigverify
