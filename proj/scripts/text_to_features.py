#!/usr/bin/env python3
"""Convert a text-field dataset into the feature-vector JSONL the toolkit reads.

Published hierarchical text corpora usually ship records like

    {"token": "some document text ...", "labels": ["physics", "optics"]}

while this toolkit's trainer consumes pre-embedded vectors:

    {"labels": ["physics", "optics"], "features": [0.13, -0.27, ...]}

This script documents that mapping.  The embedding itself is pluggable -- any
sentence encoder works, as long as every record gets a vector of the same
dimension.  The built-in default is a deterministic hashed bag-of-words, which
is only a placeholder so the pipeline runs end to end without extra
dependencies; swap `embed` for a real encoder before measuring anything.

Usage:
    text_to_features.py --dim 256 < corpus.jsonl > dataset.jsonl

Input: one JSON object per line with a text field (default key "token") and a
"labels" array of node names.  Output: toolkit dataset JSONL, one record per
line, labels passed through untouched.
"""

import argparse
import hashlib
import json
import math
import sys


def embed(text: str, dim: int) -> list[float]:
    """Hashed bag-of-words: each whitespace token adds +/-1 to one bucket.

    Replace this with a call into a real sentence encoder; everything else in
    the pipeline only cares that the output is a fixed-dimension list.
    """
    vec = [0.0] * dim
    for token in text.lower().split():
        digest = hashlib.md5(token.encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:4], "little") % dim
        sign = 1.0 if digest[4] & 1 else -1.0
        vec[bucket] += sign
    norm = math.sqrt(sum(v * v for v in vec))
    if norm > 0:
        vec = [v / norm for v in vec]
    return vec


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=256, help="feature dimension")
    ap.add_argument("--text-key", default="token", help="name of the text field")
    args = ap.parse_args()

    for line_no, line in enumerate(sys.stdin, 1):
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if args.text_key not in record or "labels" not in record:
            print(f"line {line_no}: need '{args.text_key}' and 'labels'", file=sys.stderr)
            return 1
        out = {
            "labels": record["labels"],
            "features": embed(record[args.text_key], args.dim),
        }
        print(json.dumps(out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
