#include <iostream>
#include <vector>

int main() {
    int n;
    std::cin >> n;
    if (n < 2) {
        std::cout << 0 << std::endl;
        return 0;
    }
    std::vector<bool> composite(n + 1, false);
    int count = 0;
    for (int i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        ++count;
        for (long long j = 1LL * i * i; j <= n; j += i) composite[j] = true;
    }
    std::cout << count << std::endl;
    return 0;
}
