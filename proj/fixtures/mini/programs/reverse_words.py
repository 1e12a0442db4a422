line = input()
words = line.split()
print(" ".join(reversed(words)))
