#include "botsort/cli.hpp"

int main(int argc, char** argv) { return botsort::run_cli(argc, argv); }
