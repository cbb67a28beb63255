#include "booltree/harness.hpp"

int main(int argc, char** argv) { return booltree::cli_main(argc, argv); }
