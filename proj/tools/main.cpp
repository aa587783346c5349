#include "cli.hpp"

int main(int argc, char** argv) { return isingclt::cli::run(argc, argv); }
