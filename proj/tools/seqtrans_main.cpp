// tools/seqtrans_main.cpp
#include <cstdio>
int main() { std::puts("placeholder"); return 0; }
