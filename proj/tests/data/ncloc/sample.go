// Package main is a fixture.
package main

import "fmt"

/* block
comment */

var banner = `raw string
/* not a comment */
`

func main() {
	s := "// not a comment"
	fmt.Println(s, banner) // trailing
	/* inline */ x := 1
	//
	fmt.Println(x, '/')
}
// done
