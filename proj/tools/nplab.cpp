#include "nplab/cli.hpp"

int main(int argc, char** argv) { return nplab::cli::main_entry(argc, argv); }
