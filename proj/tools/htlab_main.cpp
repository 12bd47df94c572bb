#include "htlab/cli.hpp"

int main(int argc, char** argv) { return htlab::xlab::cli(argc, argv); }
