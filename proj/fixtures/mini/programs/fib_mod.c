#include <stdio.h>

#define MOD 1000000007LL

int main(void) {
    long long n, a = 0, b = 1;
    scanf("%lld", &n);
    for (long long i = 0; i < n; i++) {
        long long t = (a + b) % MOD;
        a = b;
        b = t;
    }
    printf("%lld\n", a);
    return 0;
}
