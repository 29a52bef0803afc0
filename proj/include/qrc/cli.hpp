#pragma once

#include <ostream>

namespace qrc::cli {

/// Exit codes: 0 success, 1 usage or contract error, 2 I/O or network error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qrc::cli
