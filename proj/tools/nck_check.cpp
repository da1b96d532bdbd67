#include "app.hpp"

int main(int argc, char** argv) { return nck::app::main_check(argc, argv); }
