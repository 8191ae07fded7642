#include "geoshoot/pipeline.hpp"

int main(int argc, char** argv) { return geoshoot::run_cli(argc, argv); }
