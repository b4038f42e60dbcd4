#include "fieldnet/cli.hpp"

int main(int argc, char** argv) { return fieldnet::cli_main(argc, argv); }
