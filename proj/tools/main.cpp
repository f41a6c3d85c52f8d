#include "ialcpg/cli.hpp"

int main(int argc, char** argv) { return ialcpg::cli::run(argc, argv); }
