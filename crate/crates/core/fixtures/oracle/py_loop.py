spin = 0
while spin >= 0:
    spin = (spin + 1) % 1000
print("done")
