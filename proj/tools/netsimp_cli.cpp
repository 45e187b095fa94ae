#include <cstdio>

int main() {
    std::puts("netsimp: placeholder");
    return 0;
}
