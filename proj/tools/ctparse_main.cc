#include <string>
#include <vector>

#include "ctparse/cli.h"

int main(int argc, char **argv) {
  return ctparse::cli::Dispatch(std::vector<std::string>(argv, argv + argc));
}
