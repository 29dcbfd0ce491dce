#ifndef TSDICT_ERRORS_HPP
#define TSDICT_ERRORS_HPP

// Error model shared by every module: one exception type carrying a stable
// error code. Callers that need to branch on the failure kind switch on
// code(); everything else just propagates or prints what().

#include <stdexcept>
#include <string>

namespace tsdict {

enum class errc {
  // series-core / profiles
  window_too_small,
  window_too_large,
  non_finite_input,
  length_mismatch,
  series_too_short,
  // dictionary
  iteration_cap_exceeded,
  source_mismatch,
  // dict-join
  window_mismatch,
  empty_dictionary,
  empty_profile,
  degenerate_labels,
  // io-formats
  parse_error,
  version_error,
  schema_error,
  io_error,
  // generic precondition breach not covered above
  invalid_argument,
};

inline const char* errc_name(errc c) {
  switch (c) {
  case errc::window_too_small: return "WindowTooSmall";
  case errc::window_too_large: return "WindowTooLarge";
  case errc::non_finite_input: return "NonFiniteInput";
  case errc::length_mismatch: return "LengthMismatch";
  case errc::series_too_short: return "SeriesTooShort";
  case errc::iteration_cap_exceeded: return "IterationCapExceeded";
  case errc::source_mismatch: return "SourceMismatch";
  case errc::window_mismatch: return "WindowMismatch";
  case errc::empty_dictionary: return "EmptyDictionary";
  case errc::empty_profile: return "EmptyProfile";
  case errc::degenerate_labels: return "DegenerateLabels";
  case errc::parse_error: return "ParseError";
  case errc::version_error: return "VersionError";
  case errc::schema_error: return "SchemaError";
  case errc::io_error: return "IoError";
  case errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
public:
  error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const noexcept { return code_; }

private:
  errc code_;
};

} // namespace tsdict

#endif // TSDICT_ERRORS_HPP
