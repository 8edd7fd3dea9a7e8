#pragma once

namespace claimex {

// Full command-line interface: validate / extract / judge / report /
// agreement / benchmark / temporal. Returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace claimex
