#include "wasslearn/harness/cli.hpp"

int main(int argc, char** argv) { return wasslearn::harness::run_cli(argc, argv); }
