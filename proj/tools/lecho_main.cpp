#include "lecho/experiment_runner.hpp"

int main(int argc, char** argv) { return lecho::run_cli(argc, argv); }
