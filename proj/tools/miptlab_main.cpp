#include "mipt/cli.hpp"

int main(int argc, char** argv) { return mipt::cli::main_entry(argc, argv); }
