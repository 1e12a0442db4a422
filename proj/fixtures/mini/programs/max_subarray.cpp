#include <iostream>

int main() {
    int n;
    std::cin >> n;
    long long best = 0, cur = 0;
    for (int i = 0; i < n; ++i) {
        long long x;
        std::cin >> x;
        cur = (i == 0 || cur < 0) ? x : cur + x;
        if (i == 0 || cur > best) best = cur;
    }
    std::cout << best << "\n";
    return 0;
}
