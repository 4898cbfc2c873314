#pragma once

#include <doctest.h>

#include "kpz/error.hpp"

// Runs expr and returns the kpz::ErrorCode it threw; fails the test when nothing is thrown.
#define KPZ_ERROR_CODE(expr)                                  \
    ([&]() -> kpz::ErrorCode {                                \
        try {                                                 \
            (void)(expr);                                     \
        } catch (const kpz::Error& e) {                       \
            return e.code();                                  \
        }                                                     \
        FAIL("expected kpz::Error from " #expr);              \
        return kpz::ErrorCode::ContractViolation;             \
    }())

#define CHECK_CODE(expr, code) CHECK(KPZ_ERROR_CODE(expr) == (code))
