#pragma once

namespace cookbench::cli {

// Exit codes: 0 success, 2 config error, 3 data error, 4 training divergence.
int run_cli(int argc, char** argv);

}  // namespace cookbench::cli
