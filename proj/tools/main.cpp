#include <string>
#include <vector>

#include "twophoton/cli.hpp"

int main(int argc, char** argv) {
    return twophoton::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
