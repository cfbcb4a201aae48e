#include <string>
#include <vector>

#include "did/cli.hpp"

int main(int argc, char** argv) {
    return did::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
