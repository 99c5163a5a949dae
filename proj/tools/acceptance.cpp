#include <string>
#include <vector>

#include "npch/acceptance.hpp"

int main(int argc, char** argv) { return npch::acceptance_main(std::vector<std::string>(argv + 1, argv + argc)); }
