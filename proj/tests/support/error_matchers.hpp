#pragma once

#include <gtest/gtest.h>

#include "orthant/error.hpp"

#define EXPECT_ORTHANT_ERROR(statement, expected_kind)                              \
  do {                                                                              \
    try {                                                                           \
      statement;                                                                    \
      ADD_FAILURE() << "expected " << orthant::to_string(expected_kind) << " error"; \
    } catch (const orthant::Error& e) {                                             \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                               \
    }                                                                               \
  } while (false)
