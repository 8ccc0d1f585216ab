#include "rgap/cli.hpp"

int main(int argc, char** argv) { return rgap::cli::run(argc, argv); }
