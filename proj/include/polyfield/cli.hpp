#pragma once

#include <iosfwd>

namespace polyfield {

/// Command-line entry point. argv[0] is the program name. Returns 0 on
/// success, 2 on argument errors and 1 on runtime errors; messages go to
/// `err`, results that are not written to files go to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace polyfield
