#include "dme/cli.hpp"

int main(int argc, char** argv) { return dme::cli::run(argc, argv); }
