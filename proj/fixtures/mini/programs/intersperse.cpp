#include <iostream>
#include <sstream>
#include <string>
#include <vector>

std::vector<int> intersperse(const std::vector<int>& numbers, int delimeter) {
    std::vector<int> result;
    for (size_t i = 0; i < numbers.size(); ++i) {
        if (i > 0) result.push_back(delimeter);
        result.push_back(numbers[i]);
    }
    return result;
}

int main() {
    std::string line;
    std::getline(std::cin, line);
    std::istringstream in(line);
    std::vector<int> numbers;
    int x;
    while (in >> x) numbers.push_back(x);
    int delimeter;
    std::cin >> delimeter;
    std::vector<int> result = intersperse(numbers, delimeter);
    for (size_t i = 0; i < result.size(); ++i) {
        if (i > 0) std::cout << ' ';
        std::cout << result[i];
    }
    std::cout << '\n';
    return 0;
}
