// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssv {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DatasetError : public Error {
 public:
  enum class Kind { MissingField, DuplicateLabel, UnreadableFile, InvalidTask };

  DatasetError(Kind kind, std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  /// 1-based line number in the dataset file; 0 when the file itself failed.
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

struct SourcePos {
  int line = 0;
  int col = 0;
};

class DslError : public Error {
 public:
  enum class Kind {
    Syntax,
    UnknownSymbol,
    SortMismatch,
    ArityMismatch,
    MissingSegment,
    DuplicateOptionLabel,
    DuplicateName,
    UnboundedComprehension,
  };

  DslError(Kind kind, const std::string& what, SourcePos pos = {})
      : Error(format(kind, what, pos)), kind_(kind), pos_(pos), detail_(what) {}

  Kind kind() const noexcept { return kind_; }
  SourcePos pos() const noexcept { return pos_; }
  const std::string& detail() const noexcept { return detail_; }

  static const char* kindName(Kind kind);

 private:
  static std::string format(Kind kind, const std::string& what, SourcePos pos);

  Kind kind_;
  SourcePos pos_;
  std::string detail_;
};

/// The external solver failed to run or produced output that is not a status.
class SolverError : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  enum class Kind { Unsupported, CapExceeded };
  OracleError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class LlmError : public Error {
 public:
  enum class Kind { MissingTranscript, ProviderError, Timeout, MissingSlot, BudgetExceeded, Config };
  LlmError(Kind kind, const std::string& what, int status = 0)
      : Error(what), kind_(kind), status_(status) {}
  Kind kind() const noexcept { return kind_; }
  /// HTTP status for ProviderError, 0 otherwise.
  int status() const noexcept { return status_; }

 private:
  Kind kind_;
  int status_;
};

/// An LLM response does not follow the expected block format.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssv
