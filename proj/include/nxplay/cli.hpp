#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nxplay {

// Entry point behind the `nxplay` executable. args excludes the program name.
// Returns 0 on success, 1 on a domain error (one-line diagnostic on err), 2 on
// a usage error (synopsis on err).
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nxplay
