#include <iostream>

#include "qmoments_app/commands.hpp"

int main(int argc, char** argv) {
  return qmoments::app::run(argc, argv, std::cout, std::cerr);
}
