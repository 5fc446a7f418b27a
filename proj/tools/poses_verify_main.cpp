#include "poses/cli.hpp"

int main(int argc, char** argv) { return poses::cli::main_entry(argc, argv); }
