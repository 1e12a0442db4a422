def main():
    data = open(0).read().split()
    n = int(data[0])
    print(sum(int(x) for x in data[2:1 + n]))


main()
