#include <cctype>
#include <iostream>
#include <string>

int main() {
    std::string line;
    std::getline(std::cin, line);
    int count = 0;
    for (char c : line) {
        char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (std::string("aeiou").find(l) != std::string::npos) ++count;
    }
    std::cout << count << "\n";
    return 0;
}
