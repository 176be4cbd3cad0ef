#include "evosql/errors.hpp"

namespace evosql {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnreadableDatabase: return "UnreadableDatabase";
    case ErrorKind::EmptySchema: return "EmptySchema";
    case ErrorKind::PairNotInSchema: return "PairNotInSchema";
    case ErrorKind::UnparsableDifficulty: return "UnparsableDifficulty";
    case ErrorKind::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorKind::NoSqlFound: return "NoSqlFound";
    case ErrorKind::NonSelectStatement: return "NonSelectStatement";
    case ErrorKind::MalformedCritique: return "MalformedCritique";
    case ErrorKind::BackendExhausted: return "BackendExhausted";
    case ErrorKind::BackendFailure: return "BackendFailure";
    case ErrorKind::NoValidSubsets: return "NoValidSubsets";
    case ErrorKind::ExhaustedMutations: return "ExhaustedMutations";
    case ErrorKind::EvolutionStalled: return "EvolutionStalled";
    case ErrorKind::ErroredExecution: return "ErroredExecution";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NoCandidates: return "NoCandidates";
    case ErrorKind::KeyAbsent: return "KeyAbsent";
    case ErrorKind::EmptyPool: return "EmptyPool";
    case ErrorKind::InsufficientSubsets: return "InsufficientSubsets";
    case ErrorKind::MissingDataset: return "MissingDataset";
    case ErrorKind::UnknownQuestionId: return "UnknownQuestionId";
    case ErrorKind::TraceWithoutBuffer: return "TraceWithoutBuffer";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace evosql
