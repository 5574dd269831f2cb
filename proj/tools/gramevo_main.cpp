#include "gramevo/cli.hpp"

int main(int argc, char** argv) { return gramevo::cli_main(argc, argv); }
