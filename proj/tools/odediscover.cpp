#include "odediscover/cli.hpp"

int main(int argc, char** argv) { return odediscover::cli::main_entry(argc, argv); }
