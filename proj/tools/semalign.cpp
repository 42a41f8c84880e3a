#include <cstdio>
int main() { std::puts("semalign: cli under construction"); return 0; }
