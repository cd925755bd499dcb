#pragma once

#include <stdexcept>
#include <string>

namespace spc {

// Numeric values are part of the C ABI (see shapleypc.h); append only.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kIndex = 2,
  kCycle = 3,
  kDuplicateEdge = 4,
  kSelfLoop = 5,
  kNotAdjacent = 6,
  kDegenerateColumn = 7,
  kSingularMatrix = 8,
  kInsufficientSamples = 9,
  kInvalidCoalition = 10,
  kNotUnshieldedTriple = 11,
  kEmptyTestSet = 12,
  kTooDense = 13,
  kSampleCapExceeded = 14,
  kParse = 15,
  kSemantic = 16,
  kNodeCountMismatch = 17,
  kDivisionByZero = 18,
  kNoPaths = 19,
  kEmptyResults = 20,
  kIo = 21,
  kConfig = 22,
  kInternal = 99,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by the BIF reader; carries the 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(ErrorCode::kParse, "line " + std::to_string(line) + ", column " +
                                     std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace spc
