data = open(0).read().split()
n = int(data[0])
best = cur = 0
for i in range(n):
    x = int(data[1 + i])
    cur = x if i == 0 or cur < 0 else cur + x
    if i == 0 or cur > best:
        best = cur
print(best)
