#pragma once

#include <iosfwd>

namespace sgin::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sgin::cli
