#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dynega {

enum class ErrorCode {
    InvalidArgument,
    Io,
    Parse,
    DuplicateItemId,
    UnknownDimension,
    InvalidPool,
    MissingId,
    ExtraId,
    RaggedRow,
    NonFiniteValue,
    Http,
    InconsistentDimension,
    RetryExhausted,
    SeriesTooShort,
    RankDeficient,
    SingularNormalEquations,
    DepthTooShallow,
    ZeroVarianceColumn,
    TooFewNodes,
    DisconnectedNetwork,
    NonSymmetric,
    NonPositiveTrace,
    EmptyCommunity,
    LengthMismatch,
    EmptyGrid,
    AllDepthsSkipped,
    NoValidPoints,
    TraceTooShort,
    NoResults,
    Internal,
};

std::string_view to_string(ErrorCode code);

// Position of an offending value in a tabular input (0-based data row / column).
struct ErrorLocation {
    std::size_t row = 0;
    std::size_t col = 0;
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<ErrorLocation> where = std::nullopt)
        : std::runtime_error(message), code_(code), where_(where) {}

    ErrorCode code() const noexcept { return code_; }
    const std::optional<ErrorLocation>& where() const noexcept { return where_; }

private:
    ErrorCode code_;
    std::optional<ErrorLocation> where_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

} // namespace dynega
