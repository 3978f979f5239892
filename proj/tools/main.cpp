#include "dsel/cli.hpp"

int main(int argc, char** argv) { return dsel::cli::run(argc, argv); }
