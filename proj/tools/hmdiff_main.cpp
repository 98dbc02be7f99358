#include <iostream>

#include "hmdiff/report.hpp"

int main(int argc, char** argv) { return hmdiff::run_cli(argc, argv, std::cout, std::cerr); }
