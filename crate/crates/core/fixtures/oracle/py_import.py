import tj_absent_module

a, b = map(int, input().split())
print(tj_absent_module.add(a, b))
