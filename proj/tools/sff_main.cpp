#include "sff/cli.hpp"

int main(int argc, char** argv) { return sff::run_cli(argc, argv); }
