#include "claimex/cli.hpp"

int main(int argc, char** argv) { return claimex::run_cli(argc, argv); }
