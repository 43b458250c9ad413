#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wristlink {

enum class Errc {
  UnknownSymbol,
  InvalidDuration,
  InvalidProfile,
  InvalidTrace,
  EmptyAlphabet,
  EmptyScript,
  EmptyCalibration,
  InvalidConfig,
  AmbiguousRun,
  UnterminatedSymbol,
  SeriesTooShort,
  EmptyDataset,
  DegenerateLabels,
  ShapeMismatch,
  TooFewPoints,
  NoCoverage,
  UnknownOption,
  MalformedCluster,
  AmplitudeOutOfRange,
  InvalidQuestion,
  InvalidParams,
  InvalidOptions,
  DegenerateBaseline,
  ParseError,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::UnknownSymbol: return "UnknownSymbol";
    case Errc::InvalidDuration: return "InvalidDuration";
    case Errc::InvalidProfile: return "InvalidProfile";
    case Errc::InvalidTrace: return "InvalidTrace";
    case Errc::EmptyAlphabet: return "EmptyAlphabet";
    case Errc::EmptyScript: return "EmptyScript";
    case Errc::EmptyCalibration: return "EmptyCalibration";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::AmbiguousRun: return "AmbiguousRun";
    case Errc::UnterminatedSymbol: return "UnterminatedSymbol";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::DegenerateLabels: return "DegenerateLabels";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::NoCoverage: return "NoCoverage";
    case Errc::UnknownOption: return "UnknownOption";
    case Errc::MalformedCluster: return "MalformedCluster";
    case Errc::AmplitudeOutOfRange: return "AmplitudeOutOfRange";
    case Errc::InvalidQuestion: return "InvalidQuestion";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::InvalidOptions: return "InvalidOptions";
    case Errc::DegenerateBaseline: return "DegenerateBaseline";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI, Python bindings) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace wristlink
