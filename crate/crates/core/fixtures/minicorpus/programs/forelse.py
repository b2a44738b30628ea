# fixture-id: forelse
K = int(input())
x = 0
for i in range(1, K + 1):
    x = (x * 10 + 7) % K
    if x == 0:
        print(i)
        break
else:
    print(-1)
