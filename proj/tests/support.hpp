#pragma once

// Include after defining the doctest main macro in the test's own TU.

#include "doctest.h"
#include "sepris/common.hpp"

namespace testutil {

// Runs fn, which must throw sepris::Error, and returns the error code.
template <typename Fn>
inline sepris::Errc error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const sepris::Error& e) {
        return e.code();
    }
    FAIL("expected a sepris::Error");
    return sepris::Errc::IoError;  // unreachable
}

}  // namespace testutil
