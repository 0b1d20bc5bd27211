#include "seqscreen/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return seqscreen::run_cli(argc, argv, std::cout, std::cerr); }
