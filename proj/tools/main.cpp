#include <string>
#include <vector>

#include "srr/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return srr::run_cli(args);
}
