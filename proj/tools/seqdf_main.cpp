#include "app.hpp"

int main(int argc, char** argv) { return seqdf::cli::run(argc, argv); }
