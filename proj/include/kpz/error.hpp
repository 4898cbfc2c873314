#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kpz {

enum class ErrorCode {
    NonPositiveStep,
    CountTooSmall,
    BadK,
    OriginNotOnGrid,
    IndexOutOfRange,
    BadOrder,
    LineOutOfRange,
    InstanceTooLarge,
    BadTimeOrder,
    WindowTooSmall,
    WrongTimes,
    OverlappingIntervals,
    MisalignedSplit,
    GridMismatch,
    AllMinusInfinityColumn,
    ApexOffGrid,
    BadExponent,
    HypothesisFailed,
    ContractViolation,
    EmptySample,
    BadVariance,
    WindowOutOfGrid,
    BadAGrid,
    TooFewReplications,
    ConfigInvalid,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace kpz
