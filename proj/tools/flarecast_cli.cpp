#include "flarecast/cli.hpp"

int main(int argc, char** argv) {
    return flarecast::cli::run(argc, argv);
}
