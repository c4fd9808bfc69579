import sys

for line in sys.stdin:
    print("this is not a message", flush=True)
