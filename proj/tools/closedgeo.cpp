#include "closedgeo/cli.hpp"

int main(int argc, char** argv) { return closedgeo::run_cli(argc, argv); }
