// Sample without a license header
#include <iostream>
#include <string>

/*
 * Doc block
 */
auto raw = R"(line one
// still inside raw string
)";

int main() {
    std::string s = "a\"b // not comment";  /* c */
    /* a */ /* b */
    /* x */ int y = 2; /* z */
    std::cout << s << raw << y << '\n';
    // return 1;
    return 0;
}
// end
