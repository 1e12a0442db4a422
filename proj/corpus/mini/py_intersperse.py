from typing import List


def intersperse(numbers: List[int], delimeter: int) -> List[int]:
    if not numbers:
        return []
    result = []
    for n in numbers[:-1]:
        result.append(n)
        result.append(delimeter)
    result.append(numbers[-1])
    return result


numbers = [int(x) for x in input().split()]
delimeter = int(input())
print(" ".join(str(x) for x in intersperse(numbers, delimeter)))
