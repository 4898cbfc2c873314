#include "kpz/lab/cli.hpp"

int main(int argc, char** argv) { return kpz::lab::cli_main(argc, argv); }
