#include <string>
#include <vector>

#include "tubelet/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return tubelet::cli_run(args);
}
