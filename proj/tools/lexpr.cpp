#include "lexpr/cli.hpp"

int main(int argc, char** argv) { return lexpr::cli::run(argc, argv); }
