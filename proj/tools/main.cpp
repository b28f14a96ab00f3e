#include "pomaudit/cli.hpp"

int main(int argc, char** argv) { return pomaudit::dispatch(argc, argv); }
