#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coexist
{

/// Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
int cli_main(int argc, char const* const* argv, std::ostream& out, std::ostream& err);

/// Convenience form; args excludes the program name.
int cli_main(std::vector<std::string> const& args, std::ostream& out,
             std::ostream& err);

}  // namespace coexist
