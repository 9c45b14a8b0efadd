#include "cookbench/cli.hpp"

int main(int argc, char** argv) { return cookbench::cli::run_cli(argc, argv); }
