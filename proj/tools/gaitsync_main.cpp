#include <iostream>

#include "gaitsync/report.hpp"

int main(int argc, char** argv) { return gaitsync::dispatch(argc, argv, std::cout, std::cerr); }
