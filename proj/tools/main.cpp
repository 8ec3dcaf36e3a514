#include "qdas/cli.hpp"

int main(int argc, char** argv) { return qdas::run_cli(argc, argv); }
