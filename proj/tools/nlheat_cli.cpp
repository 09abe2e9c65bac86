#include "nlheat/cli.hpp"

int main(int argc, char** argv) { return nlheat::cli::run(argc, argv); }
