#include "dlps/cli.hpp"

int main(int argc, char** argv) { return dlps::cli::run_cli(argc, argv); }
