#include <string>
#include <vector>

#include "daid/cli.hpp"

int main(int argc, char** argv) {
    return daid::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
