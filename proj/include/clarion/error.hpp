#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace clarion {

enum class ErrorCode {
    MissingFile,
    MalformedRow,
    MissingColumn,
    DuplicateId,
    EmptyQuestionText,
    InvalidEncoding,
    UnknownMetric,
    ValueOutOfRange,
    EmptyBank,
    UnknownQuestionId,
    EmptyInput,
    BadIndexFile,
    RemoteUnavailable,
    MissingPrecomputedScore,
    InvalidConfig,
};

std::string_view to_string(ErrorCode code);

/**
 * Data-level failure raised by loaders, index and scorers.
 *
 * line() is 1-based and 0 when the error is not tied to a file row.
 */
class DataError : public std::runtime_error {
public:
    DataError(ErrorCode code, std::string detail, std::size_t line = 0);

    ErrorCode code() const noexcept { return code_; }
    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::size_t line_;
    std::string detail_;
};

}  // namespace clarion
