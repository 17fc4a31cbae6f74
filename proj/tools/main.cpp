#include "rwt/cli/dispatch.hpp"

int main(int argc, char** argv) { return rwt::cli::dispatch(argc, argv); }
