#include "hpcfe/cli.hpp"

int main(int argc, char** argv) { return hpcfe::cli::run(argc, argv); }
