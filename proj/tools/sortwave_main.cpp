#include "sortwave/cli.hpp"

int main(int argc, char** argv) { return sortwave::cli::main_entry(argc, argv); }
