#include "tstcnn/cli/app.hpp"

int main(int argc, char** argv) { return tstcnn::cli::run(argc, argv); }
