#include <cstdlib>
#include <iostream>

long long gcd(long long a, long long b) {
    while (b != 0) {
        long long t = a % b;
        a = b;
        b = t;
    }
    return std::llabs(a);
}

int main() {
    long long a, b;
    std::cin >> a >> b;
    std::cout << gcd(a, b) << "\n";
    return 0;
}
