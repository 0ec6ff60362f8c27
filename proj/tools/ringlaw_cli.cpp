#include "ringlaw/cli.hpp"

int main(int argc, char** argv) { return ringlaw::cli::main(argc, argv); }
