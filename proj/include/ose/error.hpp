#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ose {

/// Every user-facing failure carries one of these codes. The CLI maps any
/// ose::Error to exit status 1; anything else escaping is an internal error.
enum class ErrorCode {
  SyntaxError,
  UndeclaredName,
  DuplicateDeclaration,
  UnboundHeadVariable,
  NonQLAxiomEncountered,
  UnmappedSymbol,
  InstanceTooLarge,
  UnknownTable,
  UnknownColumn,
  DialectViolation,
  MissingTimestampColumn,
  OutOfOrderSample,
  InconsistentABox,
  CapExceeded,
  InvalidParams,
  UnknownKPI,
  DegenerateSeries,
  TypeMismatch,
  CycleDetected,
  UnboundSource,
  UnboundSink,
  MissingDynamicPart,
  UnboundEventClass,
  UnknownEventClass,
  UnknownDataSource,
  NonMonotoneTimestamp,
  MalformedEvent,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message)
      : Error(ErrorCode::SyntaxError,
              std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class CapExceeded : public Error {
 public:
  CapExceeded(std::size_t round, std::size_t live, std::size_t cap)
      : Error(ErrorCode::CapExceeded,
              "live individuals " + std::to_string(live) + " exceed cap " +
                  std::to_string(cap) + " at round " + std::to_string(round)),
        round_(round) {}

  std::size_t round() const noexcept { return round_; }

 private:
  std::size_t round_;
};

}  // namespace ose
