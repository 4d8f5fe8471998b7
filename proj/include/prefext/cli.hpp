#pragma once

#include <iosfwd>

namespace prefext::cli {

/// Exit codes: 0 success, 1 runtime error, 2 usage or configuration error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prefext::cli
