#include "mcem/cli/commands.hpp"

int main(int argc, char** argv) { return mcem::cli::run_cli(argc, argv); }
