#pragma once

#include <functional>
#include <optional>

#include <gtest/gtest.h>

#include "slotcr/error.hpp"

namespace slotcr::test {

/// Code of the slotcr::Error thrown by f, or nullopt if nothing was thrown.
inline std::optional<ErrorCode> error_code(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

} // namespace slotcr::test

#define EXPECT_ERROR_CODE(expr, expected) \
    EXPECT_EQ(::slotcr::test::error_code([&] { (void)(expr); }), std::optional(expected))
