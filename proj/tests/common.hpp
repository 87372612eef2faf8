#pragma once

#include <doctest.h>

#include "sqe/error.hpp"

namespace testing {

// Kind of the sqe::Error raised by f, failing the test when nothing is thrown.
template <class F>
sqe::ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const sqe::Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return sqe::ErrorKind::kSoundness;
}

}  // namespace testing
