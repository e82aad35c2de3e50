#include "clarion/error.hpp"

namespace clarion {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::EmptyQuestionText: return "EmptyQuestionText";
        case ErrorCode::InvalidEncoding: return "InvalidEncoding";
        case ErrorCode::UnknownMetric: return "UnknownMetric";
        case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
        case ErrorCode::EmptyBank: return "EmptyBank";
        case ErrorCode::UnknownQuestionId: return "UnknownQuestionId";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::BadIndexFile: return "BadIndexFile";
        case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
        case ErrorCode::MissingPrecomputedScore: return "MissingPrecomputedScore";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& detail, std::size_t line) {
    std::string msg(to_string(code));
    if (line > 0) {
        msg += " at line " + std::to_string(line);
    }
    if (!detail.empty()) {
        msg += ": " + detail;
    }
    return msg;
}

}  // namespace

DataError::DataError(ErrorCode code, std::string detail, std::size_t line)
    : std::runtime_error(compose(code, detail, line)),
      code_(code),
      line_(line),
      detail_(std::move(detail)) {}

}  // namespace clarion
