#ifndef CHROMAMIX_ERRORS_HPP
#define CHROMAMIX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace chromamix {

// Error categories; the CLI maps these onto distinct exit codes.
enum class ErrorKind {
  io,                  // unreadable/unwritable files
  format,              // unsupported or malformed file contents
  empty_input,         // zero-length audio or empty collections
  bounds,              // out-of-range slice windows
  shape,               // mismatched lengths/dimensions
  parameter,           // inconsistent transform or config parameters
  invalid_input,       // NaN scores and similar
  mode,                // stem role does not match the matching mode
  insufficient,        // not enough candidates or duration
  validation,          // manifest problems: duplicates, dangling refs, misalignment
  undefined_reference, // zero-energy SDR reference
  empty_evaluation,    // nothing to evaluate
  usage,               // bad CLI flag combinations
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

} // namespace chromamix

#endif
