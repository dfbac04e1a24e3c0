"""Fake evaluator worker for protocol tests.

usage: worker.py MODE
  echo       accuracy = (sum(params) % 100) / 100
  reverse    like echo, but answers each pair of requests in reverse order
  range      replies accuracy 1.5
  malformed  replies a line that is not JSON
  crash      exits without replying
  error      replies {"id", "error"}
  silent     reads requests and never replies
  log        like echo, and appends each request line to $WORKER_LOG
"""
import json
import os
import sys
import time


def score(req):
    return (sum(req["params"]) % 100) / 100.0


def send(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main():
    mode = sys.argv[1]
    held = []
    for line in sys.stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        if mode == "log":
            with open(os.environ["WORKER_LOG"], "a") as f:
                f.write(line)
        if mode in ("echo", "log"):
            send({"id": req["id"], "accuracy": score(req)})
        elif mode == "reverse":
            held.append(req)
            if len(held) == 2:
                for r in reversed(held):
                    send({"id": r["id"], "accuracy": score(r)})
                held = []
        elif mode == "range":
            send({"id": req["id"], "accuracy": 1.5})
        elif mode == "malformed":
            sys.stdout.write("accuracy: high\n")
            sys.stdout.flush()
        elif mode == "crash":
            sys.exit(3)
        elif mode == "error":
            send({"id": req["id"], "error": "out of memory"})
        elif mode == "silent":
            time.sleep(30)


if __name__ == "__main__":
    main()
