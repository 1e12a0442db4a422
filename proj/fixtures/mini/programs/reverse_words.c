#include <stdio.h>
#include <string.h>

int main(void) {
    char line[4096];
    char *words[1024];
    int n = 0;
    if (!fgets(line, sizeof line, stdin)) line[0] = '\0';
    for (char *tok = strtok(line, " \t\r\n"); tok != NULL; tok = strtok(NULL, " \t\r\n")) {
        words[n++] = tok;
    }
    for (int i = n - 1; i >= 0; i--) {
        printf("%s", words[i]);
        if (i > 0) printf(" ");
    }
    printf("\n");
    return 0;
}
