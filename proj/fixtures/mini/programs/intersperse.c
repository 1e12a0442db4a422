#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int main(void) {
    char line[4096];
    int numbers[1024];
    int n = 0;
    int delimeter;
    if (!fgets(line, sizeof line, stdin)) line[0] = '\0';
    for (char *tok = strtok(line, " \t\r\n"); tok != NULL; tok = strtok(NULL, " \t\r\n")) {
        numbers[n++] = atoi(tok);
    }
    scanf("%d", &delimeter);
    for (int i = 0; i < n; i++) {
        if (i > 0) printf(" %d ", delimeter);
        printf("%d", numbers[i]);
    }
    printf("\n");
    return 0;
}
