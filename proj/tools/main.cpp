#include "cli.hpp"

int main(int argc, char** argv) { return arlearn::cli::cli_main(argc, argv); }
