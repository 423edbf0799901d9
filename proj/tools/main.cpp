#include <iostream>

#include "gwsnake/cli.hpp"

int main(int argc, char** argv) {
  return gwsnake::cli::dispatch(argc, argv, std::cout, std::cerr);
}
