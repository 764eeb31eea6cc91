#include "cli.hpp"

int main(int argc, char** argv) { return ambench::cli::run(argc, argv); }
