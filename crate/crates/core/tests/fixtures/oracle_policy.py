import json
import sys


def answer(prompt):
    op, arg = prompt.split(" ", 1)
    if op == "echo":
        return arg
    if op == "reverse":
        return arg[::-1]
    if op == "uppercase":
        return arg.upper()
    if op.startswith("rotate-"):
        k, m = map(int, op[len("rotate-"):].split("/"))
        return "".join(chr(ord("a") + (ord(c) - ord("a") + k) % m) for c in arg)
    return "?"


for line in sys.stdin:
    msg = json.loads(line)
    if msg["type"] == "observe":
        reply = {"type": "act", "payload": {"type": "say", "value": answer(msg["payload"]["value"])}}
        print(json.dumps({"type": "confidence", "value": 1.0}))
        print(json.dumps(reply), flush=True)
