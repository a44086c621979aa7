#include "finsler/scan.hpp"

int main(int argc, char** argv) { return finsler::cli_main(argc, argv); }
