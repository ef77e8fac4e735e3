#pragma once

#include <gtest/gtest.h>

#include "stratdepth/error.hpp"

namespace stratdepth {

template <typename Fn>
void expect_code(ErrorCode code, Fn&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace stratdepth
