#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
    using namespace dafermos::cli;
    RunConfig config;
    try {
        config = parse_args(argc, argv);
    } catch (const HelpRequested& help) {
        std::cout << help.what();
        return kExitSuccess;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    try {
        return run(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
