#include "unlearn/errors.hpp"

namespace unlearn {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonIntegralSplit: return "NonIntegralSplit";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::DegenerateOracle: return "DegenerateOracle";
    case ErrorCode::DivergedTraining: return "DivergedTraining";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnsupportedModel: return "UnsupportedModel";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DegenerateCalibration: return "DegenerateCalibration";
    case ErrorCode::NonOverlappingSplits: return "NonOverlappingSplits";
    case ErrorCode::QueryBudgetExceeded: return "QueryBudgetExceeded";
    case ErrorCode::MalformedIdx: return "MalformedIdx";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace unlearn
