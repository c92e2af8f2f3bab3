#!/usr/bin/env python3
"""Line-delimited JSON forecaster used by the bridge tests.

Modes:
  echo        repeat each channel's last value over the horizon
  coupled     channel 0 as echo; every other channel repeats channel 0's last value
  wrong-batch reply with one forecast too few
  bad-id      reply with the wrong request id
  malformed   reply with a line that is not JSON
  exit-mid    print a diagnostic to stderr and exit while handling a request
  no-ready    never answer the handshake
"""
import argparse
import json
import sys
import time


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--mode", default="echo")
    args = parser.parse_args()

    hello = json.loads(sys.stdin.readline())
    if hello.get("type") != "hello" or hello.get("version") != 1:
        print("bad hello", file=sys.stderr)
        return 2
    horizon = hello["horizon"]
    if args.mode == "no-ready":
        time.sleep(30)
        return 0
    print(json.dumps({"type": "ready"}), flush=True)

    for line in sys.stdin:
        msg = json.loads(line)
        if msg["type"] == "bye":
            return 0
        if msg["type"] != "predict":
            print(f"unexpected message {msg['type']}", file=sys.stderr)
            return 3
        if args.mode == "exit-mid":
            print("model crashed: out of memory", file=sys.stderr, flush=True)
            return 4
        if args.mode == "malformed":
            print("this is not json", flush=True)
            continue

        batch = []
        for window in msg["batch"]:
            if args.mode == "coupled":
                lead = window[0][-1]
                batch.append([[lead] * horizon for _ in window])
            else:
                batch.append([[row[-1]] * horizon for row in window])
        if args.mode == "wrong-batch":
            batch = batch[:-1]
        reply_id = msg["id"] + 1 if args.mode == "bad-id" else msg["id"]
        print(json.dumps({"type": "forecast", "id": reply_id, "batch": batch}), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
