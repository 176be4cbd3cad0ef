#pragma once

#include <stdexcept>
#include <string>

namespace evosql {

enum class ErrorKind {
  // schema
  UnreadableDatabase,
  EmptySchema,
  PairNotInSchema,
  // gateway
  UnparsableDifficulty,
  EmptyAfterFilter,
  NoSqlFound,
  NonSelectStatement,
  MalformedCritique,
  BackendExhausted,
  BackendFailure,
  // evolution
  NoValidSubsets,
  ExhaustedMutations,
  EvolutionStalled,
  // executor / voting
  ErroredExecution,
  DomainError,
  NoCandidates,
  KeyAbsent,
  // diversity
  EmptyPool,
  InsufficientSubsets,
  // dataset / cli
  MissingDataset,
  UnknownQuestionId,
  TraceWithoutBuffer,
  ConfigError,
  IoError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace evosql
