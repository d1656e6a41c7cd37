#include "epf/cli.hpp"

int main(int argc, char** argv) { return epf::cli::run({argv, argv + argc}); }
