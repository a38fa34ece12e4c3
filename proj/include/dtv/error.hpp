#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dtv {

enum class ErrorKind {
    // dataset records
    MissingField,
    InvalidField,
    EmptyInput,
    BadLabel,
    // transport and remote backends
    Transport,
    AuthFailure,
    HttpStatus,
    MalformedResponse,
    NoLogprobs,
    BackendUnavailable,
    // decomposition
    EmptyDecomposition,
    CountMismatch,
    MarkerMissing,
    // retrieval
    EmptyCorpus,
    MalformedSearchResponse,
    // verification
    EmptyEvidence,
    OutOfRange,
    UnparseableVerdict,
    MissingFixture,
    // aggregation
    EmptyScores,
    // error analysis
    ParseError,
    UnknownErrorType,
    EmptyRefinement,
    EmptyReports,
    // evaluation
    UnknownRawLabel,
    UnknownDataset,
    LengthMismatch,
    Empty,
    Io,
    DuplicateId,
    // complexity harness
    NoClaims,
    NotEnoughCombos,
    NoContext,
    // configuration and arguments
    InvalidConfig,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string detail);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

}  // namespace dtv
