#include "lpscatter/cli.hpp"

int main(int argc, char** argv) { return lpscatter::run_cli(argc, argv); }
