// SPDX-License-Identifier: Apache-2.0
#include "testlib.h"

int main(int argc, char* argv[])
{
    registerGen(argc, argv, 1);
    long long lo = opt<long long>("min", 2LL);
    long long hi = opt<long long>("max");
    println(rnd.next(lo, hi));
}
