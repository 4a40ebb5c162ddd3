#include <iostream>
#include <string>
#include <vector>

#include "robin/cli.hpp"

int main(int argc, char** argv) {
  return robin::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
