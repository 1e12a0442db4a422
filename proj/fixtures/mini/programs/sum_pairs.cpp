#include <iostream>

int main() {
    int n;
    long long sum = 0;
    std::cin >> n;
    for (int i = 0; i < n; i++) {
        long long x;
        std::cin >> x;
        sum += x;
    }
    std::cout << sum << std::endl;
    return 0;
}
