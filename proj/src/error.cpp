#include "kpz/error.hpp"

namespace kpz {

std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonPositiveStep: return "NON_POSITIVE_STEP";
        case ErrorCode::CountTooSmall: return "COUNT_TOO_SMALL";
        case ErrorCode::BadK: return "BAD_K";
        case ErrorCode::OriginNotOnGrid: return "ORIGIN_NOT_ON_GRID";
        case ErrorCode::IndexOutOfRange: return "INDEX_OUT_OF_RANGE";
        case ErrorCode::BadOrder: return "BAD_ORDER";
        case ErrorCode::LineOutOfRange: return "LINE_OUT_OF_RANGE";
        case ErrorCode::InstanceTooLarge: return "INSTANCE_TOO_LARGE";
        case ErrorCode::BadTimeOrder: return "BAD_TIME_ORDER";
        case ErrorCode::WindowTooSmall: return "WINDOW_TOO_SMALL";
        case ErrorCode::WrongTimes: return "WRONG_TIMES";
        case ErrorCode::OverlappingIntervals: return "OVERLAPPING_INTERVALS";
        case ErrorCode::MisalignedSplit: return "MISALIGNED_SPLIT";
        case ErrorCode::GridMismatch: return "GRID_MISMATCH";
        case ErrorCode::AllMinusInfinityColumn: return "ALL_MINUS_INFINITY_COLUMN";
        case ErrorCode::ApexOffGrid: return "APEX_OFF_GRID";
        case ErrorCode::BadExponent: return "BAD_EXPONENT";
        case ErrorCode::HypothesisFailed: return "HYPOTHESIS_FAILED";
        case ErrorCode::ContractViolation: return "CONTRACT_VIOLATION";
        case ErrorCode::EmptySample: return "EMPTY_SAMPLE";
        case ErrorCode::BadVariance: return "BAD_VARIANCE";
        case ErrorCode::WindowOutOfGrid: return "WINDOW_OUT_OF_GRID";
        case ErrorCode::BadAGrid: return "BAD_A_GRID";
        case ErrorCode::TooFewReplications: return "TOO_FEW_REPLICATIONS";
        case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    }
    return "UNKNOWN";
}

}  // namespace kpz
