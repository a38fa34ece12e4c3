#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "dtv/error.hpp"
#include "dtv/http.hpp"

namespace dtv {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // configuration or command-line problem
inline constexpr int kExitData = 3;   // unreadable or invalid input data

int exit_code_for(ErrorKind kind);

// Runs one command line; args excludes the program name. A null client means the real
// HTTP client.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::shared_ptr<const HttpClient> http = nullptr);

}  // namespace dtv
