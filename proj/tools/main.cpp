#include "nqst/app.hpp"

int main(int argc, char** argv) { return nqst::app::run_cli(argc, argv); }
