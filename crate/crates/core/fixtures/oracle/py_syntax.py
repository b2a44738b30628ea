def add(a, b:
    return a + b

a, b = map(int, input().split())
print(add(a, b))
