#include "tanlab/harness.hpp"

int main(int argc, char** argv) { return tanlab::cli_main(argc, argv); }
