#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixboot {

enum class ErrorCode {
  InvalidArgument,
  DegenerateCovariance,
  EmptyCluster,
  NoModelFits,
  AllReplicatesFailed,
  InsufficientReplicates,
  UnknownSlot,
  ParseError,
  MissingFile,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure the library reports carries one of the codes above so the CLI
// can map it onto a structured message and a nonzero exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures remember where they happened. Rows and columns are 1-based,
// 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t row, std::size_t column)
      : Error(ErrorCode::ParseError, decorate(message, row, column)),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string decorate(const std::string& message, std::size_t row,
                              std::size_t column);

  std::size_t row_;
  std::size_t column_;
};

}  // namespace mixboot
