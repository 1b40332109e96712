#include "okphase/cli.hpp"

int main(int argc, char** argv) { return okphase::parse_and_dispatch(argc, argv); }
