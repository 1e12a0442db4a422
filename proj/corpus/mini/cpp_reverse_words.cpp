#include <iostream>
#include <sstream>
#include <string>
#include <vector>

int main() {
    std::string line;
    std::getline(std::cin, line);
    std::istringstream in(line);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) words.push_back(w);
    for (size_t i = words.size(); i > 0; --i) {
        std::cout << words[i - 1];
        if (i > 1) std::cout << ' ';
    }
    std::cout << '\n';
    return 0;
}
