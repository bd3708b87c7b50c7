#include "feel/cli.hpp"

int main(int argc, char **argv) { return feel::cli_main(argc, argv); }
