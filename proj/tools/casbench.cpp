#include <cstdlib>
#include <iostream>

#include "casbench/cli/app.hpp"

int main(int argc, char** argv) {
    casbench::cli::CliIo io{std::cin, std::cout, std::cerr, [](const std::string& name) -> std::optional<std::string> {
                                const char* value = std::getenv(name.c_str());
                                if (value == nullptr) return std::nullopt;
                                return std::string(value);
                            }};
    return casbench::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc), io);
}
