#ifndef UNLEARN_ERRORS_HPP
#define UNLEARN_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace unlearn {

// Every failure mode carries a stable machine-readable code plus the
// offending field (when one exists), so batch sweeps can triage without
// parsing prose.
enum class ErrorCode {
    NonIntegralSplit,
    EnumerationTooLarge,
    DegenerateOracle,
    DivergedTraining,
    DimensionMismatch,
    UnsupportedModel,
    InvalidParameter,
    DegenerateCalibration,
    NonOverlappingSplits,
    QueryBudgetExceeded,
    MalformedIdx,
    EmptySelection,
    ConfigError,
    IoError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string field = {})
        : std::runtime_error(message), code_(code), field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return error_code_name(code_); }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

#define UNLEARN_DEFINE_ERROR(NAME)                                             \
    class NAME : public Error {                                                \
    public:                                                                    \
        explicit NAME(const std::string& message, std::string field = {})      \
            : Error(ErrorCode::NAME, message, std::move(field)) {}             \
    }

UNLEARN_DEFINE_ERROR(NonIntegralSplit);
UNLEARN_DEFINE_ERROR(EnumerationTooLarge);
UNLEARN_DEFINE_ERROR(DegenerateOracle);
UNLEARN_DEFINE_ERROR(DivergedTraining);
UNLEARN_DEFINE_ERROR(DimensionMismatch);
UNLEARN_DEFINE_ERROR(UnsupportedModel);
UNLEARN_DEFINE_ERROR(InvalidParameter);
UNLEARN_DEFINE_ERROR(DegenerateCalibration);
UNLEARN_DEFINE_ERROR(NonOverlappingSplits);
UNLEARN_DEFINE_ERROR(QueryBudgetExceeded);
UNLEARN_DEFINE_ERROR(MalformedIdx);
UNLEARN_DEFINE_ERROR(EmptySelection);
UNLEARN_DEFINE_ERROR(ConfigError);
UNLEARN_DEFINE_ERROR(IoError);

#undef UNLEARN_DEFINE_ERROR

} // namespace unlearn

#endif // UNLEARN_ERRORS_HPP
