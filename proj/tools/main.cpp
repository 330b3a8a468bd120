#include "ssvm/cli.hpp"

int main(int argc, char** argv) { return ssvm::cli_main(argc, argv); }
