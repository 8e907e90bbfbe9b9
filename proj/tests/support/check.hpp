// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "anlm/errors.hpp"
#include "doctest.h"

// Asserts that `expr` throws anlm::Error carrying `expected_code`.
#define CHECK_ERROR_CODE(expr, expected_code)                              \
  do {                                                                    \
    bool thrown_ = false;                                                 \
    try {                                                                 \
      (void)(expr);                                                       \
    } catch (const anlm::Error& e_) {                                     \
      thrown_ = true;                                                     \
      CHECK_MESSAGE(e_.code() == (expected_code), e_.what());             \
    }                                                                     \
    CHECK_MESSAGE(thrown_, "expected anlm::Error from " #expr);           \
  } while (0)
