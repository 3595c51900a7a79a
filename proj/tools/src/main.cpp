#include "commands.hpp"

int main(int argc, char** argv) { return nehari::cli::run(argc, argv); }
