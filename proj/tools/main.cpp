// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "rwgcfie/cli.hpp"

int main(int argc, char **argv)
{
  return rwgcfie::run_cli(argc, argv, std::cout, std::cerr);
}
