#include <ctype.h>
#include <stdio.h>
#include <string.h>

int main(void) {
    char line[4096];
    int count = 0;
    if (!fgets(line, sizeof line, stdin)) line[0] = '\0';
    for (char *p = line; *p; p++) {
        if (strchr("aeiou", tolower((unsigned char)*p)) && *p != '\0') count++;
    }
    printf("%d\n", count);
    return 0;
}
