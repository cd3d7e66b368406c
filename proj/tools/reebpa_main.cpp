#include "reebpa/cli.hpp"

int main(int argc, char** argv) { return reebpa::run_cli(argc, argv); }
