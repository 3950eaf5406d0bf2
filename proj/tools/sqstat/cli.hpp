#ifndef SQSTAT_TOOLS_CLI_HPP
#define SQSTAT_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace sqstat::cli {

enum exit_code : int {
    exit_ok = 0,
    exit_other = 1,
    exit_config = 2,
    exit_model = 3,
    exit_domain = 4,
};

// Runs one command. `args` excludes the program name. Reports go to `out`
// unless --out is given; failures write an error JSON object to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sqstat::cli

#endif  // SQSTAT_TOOLS_CLI_HPP
