package main

import "fmt"

const mod = 1000000007

func main() {
	var n int64
	fmt.Scan(&n)
	a, b := int64(0), int64(1)
	for i := int64(0); i < n; i++ {
		a, b = b, (a+b)%mod
	}
	fmt.Println(a)
}
