package main

import "fmt"

func gcd(a, b int64) int64 {
	for b != 0 {
		a, b = b, a%b
	}
	if a < 0 {
		return -a
	}
	return a
}

func main() {
	var a, b int64
	fmt.Scan(&a, &b)
	fmt.Println(gcd(a, b))
}
