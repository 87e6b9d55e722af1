#include "lagflow/cli.hpp"

int main(int argc, char** argv) { return lagflow::run_command(argc, argv); }
