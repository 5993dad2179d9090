#include "dupscope/cli.hpp"

int main(int argc, char** argv) { return dupscope::cli::run(argc, argv); }
