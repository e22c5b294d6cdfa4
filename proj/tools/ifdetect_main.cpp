#include "ifdetect/cli.hpp"

int main(int argc, char** argv) { return ifd::cli::run(argc, argv); }
