// SPDX-License-Identifier: Apache-2.0
#include "testlib.h"

int main(int argc, char* argv[])
{
    registerTestlibCmd(argc, argv);
    long long n = inf.readLong();
    long long a = ouf.readLong();
    long long b = ouf.readLong();
    if (!ouf.seekEof())
        quitf(_wa, "extra output");
    if (a < 1 || b < 1)
        quitf(_wa, "parts must be positive, got %lld and %lld", a, b);
    if (a + b != n)
        quitf(_wa, "%lld + %lld != %lld", a, b, n);
    quitf(_ok, "n=%lld", n);
}
