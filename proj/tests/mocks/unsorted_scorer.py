#!/usr/bin/env python3
"""Misbehaving external scorer: returns candidates in ascending logprob
order, violating the protocol's sortedness requirement."""
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    req = json.loads(line)
    resp = {
        "id": req["id"],
        "candidates": [
            {"token": "low", "logprob": -5.0},
            {"token": "high", "logprob": -1.0},
        ],
    }
    sys.stdout.write(json.dumps(resp) + "\n")
    sys.stdout.flush()
