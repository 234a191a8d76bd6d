#include "isochrono/cli.hpp"

int main(int argc, char **argv) { return isochrono::cli::run(argc, argv); }
