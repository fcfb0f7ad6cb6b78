#include "textsimp/cli.hpp"

int main(int argc, char** argv) { return textsimp::run_cli(argc, argv); }
