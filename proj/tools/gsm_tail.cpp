#include <iostream>

#include "gsm/cli.hpp"

int main(int argc, char** argv) {
    gsm::cli::init_logging();
    return gsm::cli::run_cli(argc, argv, std::cout, std::cerr);
}
