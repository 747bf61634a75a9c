#include "loggle/cli/cli.hpp"

int main(int argc, char** argv)
{
    return loggle::cli::run(argc, argv);
}
