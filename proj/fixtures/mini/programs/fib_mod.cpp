#include <iostream>

int main() {
    const long long MOD = 1000000007LL;
    long long n, a = 0, b = 1;
    std::cin >> n;
    for (long long i = 0; i < n; ++i) {
        long long t = (a + b) % MOD;
        a = b;
        b = t;
    }
    std::cout << a << "\n";
    return 0;
}
