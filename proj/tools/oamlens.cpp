#include "oamlens/cli.hpp"

int main(int argc, char** argv) { return oamlens::cli::main_entry(argc, argv); }
