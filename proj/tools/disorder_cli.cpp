#include "disorder/cli.hpp"

int main(int argc, char** argv) { return disorder::run_cli(argc, argv); }
