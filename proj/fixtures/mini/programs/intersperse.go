package main

import (
	"bufio"
	"fmt"
	"os"
	"strconv"
	"strings"
)

func intersperse(numbers []int, delimeter int) []int {
	result := []int{}
	for i, n := range numbers {
		if i > 0 {
			result = append(result, delimeter)
		}
		result = append(result, n)
	}
	return result
}

func main() {
	reader := bufio.NewReader(os.Stdin)
	line, _ := reader.ReadString('\n')
	numbers := []int{}
	for _, f := range strings.Fields(line) {
		v, _ := strconv.Atoi(f)
		numbers = append(numbers, v)
	}
	var delimeter int
	fmt.Fscan(reader, &delimeter)
	parts := []string{}
	for _, v := range intersperse(numbers, delimeter) {
		parts = append(parts, strconv.Itoa(v))
	}
	fmt.Println(strings.Join(parts, " "))
}
