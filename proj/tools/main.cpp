#include <vector>

#include "qclass/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qclass::cli::run(args);
}
