#include <string>
#include <vector>

#include "bosonlink/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return bosonlink::cli::main_entry(args);
}
