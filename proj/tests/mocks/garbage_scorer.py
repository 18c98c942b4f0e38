#!/usr/bin/env python3
"""Misbehaving external scorer: replies with a line that is not JSON."""
import sys

for _ in sys.stdin:
    sys.stdout.write("this is not json\n")
    sys.stdout.flush()
