#include <iostream>

#include "oracle_thrift/cli.hpp"

int main(int argc, char** argv) { return oracle_thrift::run_cli(argc, argv, std::cout, std::cerr); }
