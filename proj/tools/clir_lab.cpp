#include "clir/cli.hpp"

int main(int argc, char** argv) {
    return clir::cli::run(std::vector<std::string>(argv, argv + argc));
}
