#include "detlb/cli.hpp"

int main(int argc, char** argv) { return detlb::cli::run(argc, argv); }
