"""Independent PTAG encoder used to pin the golden-fixture values.

Usage: python3 ptag_golden.py [out.ptag]
Prints FNV-1a 64 of the encoded bytes for the 1e6-tag stream and writes the
small fixture (1000 tags) when a path is given.
"""
import struct
import sys

MASK = (1 << 64) - 1


class SplitMix:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)


def golden_tags(n, seed):
    rng = SplitMix(seed)
    t = 0
    out = []
    for _ in range(n):
        t += rng.next() % 20000
        out.append((t, rng.next() & 1))
    return out


def encode(tags, period=12500, origin=0, resolution=165):
    pulses = (tags[-1][0] // period + 1) if tags else 0
    head = b"PTAG" + struct.pack("<HHQQQQ", 1, 2, period, origin, pulses, resolution)
    body = b"".join(struct.pack("<QB7x", t, c) for t, c in tags)
    return head + body


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & MASK
    return h


if __name__ == "__main__":
    big = encode(golden_tags(1_000_000, 0x5EED))
    print("n=1e6 bytes", len(big), "fnv1a64 0x%016x" % fnv1a64(big))
    small_tags = golden_tags(1000, 0xC0FFEE)
    small = encode(small_tags)
    print("n=1000 bytes", len(small), "fnv1a64 0x%016x" % fnv1a64(small),
          "sum_ts", sum(t for t, _ in small_tags), "count_b", sum(c for _, c in small_tags),
          "last", small_tags[-1][0])
    if len(sys.argv) > 1:
        with open(sys.argv[1], "wb") as f:
            f.write(small)
