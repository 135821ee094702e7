// SPDX-License-Identifier: Apache-2.0
#include "testlib.h"

#include <string>

int main(int argc, char* argv[])
{
    registerTestlibCmd(argc, argv);
    int index = 0;
    while (!ans.seekEof())
    {
        std::string expected = ans.readToken();
        ++index;
        if (ouf.seekEof())
            quitf(_wa, "output ends before token %d", index);
        std::string found = ouf.readToken();
        if (expected != found)
            quitf(_wa, "token %d: expected %s, found %s", index, expected.c_str(), found.c_str());
    }
    if (!ouf.seekEof())
        quitf(_wa, "extra output after %d tokens", index);
    quitf(_ok, "%d tokens", index);
}
