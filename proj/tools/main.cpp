#include "detangle/cli.hpp"

int main(int argc, char** argv) { return detangle::cli(argc, argv); }
