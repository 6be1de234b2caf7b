#include <string>
#include <vector>

#include "entroheat/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  auto services = entroheat::cli::Services::standard();
  return entroheat::cli::run(args, services);
}
