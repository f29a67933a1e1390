#include "cli.hpp"

int main(int argc, char** argv) { return crfgat::run_cli(argc, argv); }
