// tfish_main.cpp - command-line driver (subcommands wired up below)
#include <iostream>

int main() {
  std::cout << "tfish CLI placeholder\n";
  return 0;
}
