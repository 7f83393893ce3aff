#include "dynega/error.hpp"

namespace dynega {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::DuplicateItemId: return "DuplicateItemId";
    case ErrorCode::UnknownDimension: return "UnknownDimension";
    case ErrorCode::InvalidPool: return "InvalidPool";
    case ErrorCode::MissingId: return "MissingId";
    case ErrorCode::ExtraId: return "ExtraId";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::Http: return "HttpError";
    case ErrorCode::InconsistentDimension: return "InconsistentDimension";
    case ErrorCode::RetryExhausted: return "RetryExhausted";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::DepthTooShallow: return "DepthTooShallow";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorCode::TooFewNodes: return "TooFewNodes";
    case ErrorCode::DisconnectedNetwork: return "DisconnectedNetwork";
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NonPositiveTrace: return "NonPositiveTrace";
    case ErrorCode::EmptyCommunity: return "EmptyCommunity";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::AllDepthsSkipped: return "AllDepthsSkipped";
    case ErrorCode::NoValidPoints: return "NoValidPoints";
    case ErrorCode::TraceTooShort: return "TraceTooShort";
    case ErrorCode::NoResults: return "NoResults";
    case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace dynega
