#include "dtv/error.hpp"

namespace dtv {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MissingField: return "MissingField";
        case ErrorKind::InvalidField: return "InvalidField";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::BadLabel: return "BadLabel";
        case ErrorKind::Transport: return "Transport";
        case ErrorKind::AuthFailure: return "AuthFailure";
        case ErrorKind::HttpStatus: return "HttpStatus";
        case ErrorKind::MalformedResponse: return "MalformedResponse";
        case ErrorKind::NoLogprobs: return "NoLogprobs";
        case ErrorKind::BackendUnavailable: return "BackendUnavailable";
        case ErrorKind::EmptyDecomposition: return "EmptyDecomposition";
        case ErrorKind::CountMismatch: return "CountMismatch";
        case ErrorKind::MarkerMissing: return "MarkerMissing";
        case ErrorKind::EmptyCorpus: return "EmptyCorpus";
        case ErrorKind::MalformedSearchResponse: return "MalformedSearchResponse";
        case ErrorKind::EmptyEvidence: return "EmptyEvidence";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::UnparseableVerdict: return "UnparseableVerdict";
        case ErrorKind::MissingFixture: return "MissingFixture";
        case ErrorKind::EmptyScores: return "EmptyScores";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::UnknownErrorType: return "UnknownErrorType";
        case ErrorKind::EmptyRefinement: return "EmptyRefinement";
        case ErrorKind::EmptyReports: return "EmptyReports";
        case ErrorKind::UnknownRawLabel: return "UnknownRawLabel";
        case ErrorKind::UnknownDataset: return "UnknownDataset";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::Empty: return "Empty";
        case ErrorKind::Io: return "Io";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::NoClaims: return "NoClaims";
        case ErrorKind::NotEnoughCombos: return "NotEnoughCombos";
        case ErrorKind::NoContext: return "NoContext";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

namespace {

std::string format_message(ErrorKind kind, const std::string& detail) {
    std::string msg(to_string(kind));
    if (!detail.empty()) {
        msg += ": ";
        msg += detail;
    }
    return msg;
}

}  // namespace

Error::Error(ErrorKind kind, std::string detail)
    : std::runtime_error(format_message(kind, detail)), kind_(kind), detail_(std::move(detail)) {}

}  // namespace dtv
