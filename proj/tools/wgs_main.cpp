#include "wgs/cli.hpp"

int main(int argc, char** argv) { return wgs::run_cli(argc, argv); }
