package main

import "fmt"

func main() {
	var n int
	fmt.Scan(&n)
	best, cur := int64(0), int64(0)
	for i := 0; i < n; i++ {
		var x int64
		fmt.Scan(&x)
		if i == 0 || cur < 0 {
			cur = x
		} else {
			cur += x
		}
		if i == 0 || cur > best {
			best = cur
		}
	}
	fmt.Println(best)
}
