#include <cstdio>

int main() {
    std::puts("steamflex: CLI not wired up yet");
    return 1;
}
