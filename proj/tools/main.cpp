#include <string>
#include <vector>

#include "pwax/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pwax::cli::run(args);
}
