#!/usr/bin/env python3
"""Line-delimited JSON adapter stub: two classes scored from the series mean.

Protocol: one JSON object per line on stdin, one JSON reply per line on
stdout.  {"op":"hello"} -> {"classes":[...],"T":-1,"C":-1};
{"op":"predict","T":t,"C":c,"series_b64":...} -> {"probs":[p0,p1]} where the
payload is little-endian float32, row-major [time][channel].
"""
import base64
import json
import math
import struct
import sys


def predict(msg):
    raw = base64.b64decode(msg["series_b64"])
    n = len(raw) // 4
    values = struct.unpack("<%df" % n, raw)
    mean = sum(values) / n if n else 0.0
    p = 1.0 / (1.0 + math.exp(-mean))
    return {"probs": [p, 1.0 - p]}


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
            if msg.get("op") == "hello":
                reply = {"classes": ["POS", "NEG"], "T": -1, "C": -1}
            elif msg.get("op") == "predict":
                reply = predict(msg)
            else:
                reply = {"error": "unknown op %r" % msg.get("op")}
        except Exception as exc:  # noqa: BLE001 - report everything to the caller
            reply = {"error": str(exc)}
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
