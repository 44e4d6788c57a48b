#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace detangle {

// Runs the command line tool. Returns 0 on success, 1 on usage or
// validation errors, 2 on I/O errors.
int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli(int argc, const char* const* argv);

}  // namespace detangle
