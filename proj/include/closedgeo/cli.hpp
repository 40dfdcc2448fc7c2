#pragma once

namespace closedgeo {

// closedgeo find | bott | ring | check; returns the process exit code
// 0 ok, 1 other failure, 2 config or usage, 3 solver, 4 round-trip mismatch, 5 ring data
int run_cli(int argc, const char* const* argv);

}  // namespace closedgeo
