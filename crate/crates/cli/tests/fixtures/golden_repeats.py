"""Brute-force reference for `repdetect repeats` output.

Usage: python3 golden_repeats.py CORPUS.jsonl MIN_LEN MIN_OCC > golden.jsonl
"""
import json
import sys
from collections import defaultdict


def main():
    path, min_len, min_occ = sys.argv[1], int(sys.argv[2]), int(sys.argv[3])
    docs = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                rec = json.loads(line)
                docs.append((rec["id"], rec["text"].encode("utf-8")))

    occ = defaultdict(list)
    for d, (_, text) in enumerate(docs):
        for i in range(len(text)):
            for j in range(i + 1, len(text) + 1):
                occ[text[i:j]].append((d, i))
    repeated = {s for s, o in occ.items() if len(o) >= 2}

    out = []
    for s in sorted(repeated):
        contained = any(
            c + s in repeated or s + c in repeated for c in (bytes([b]) for b in range(256))
        )
        if contained:
            continue
        chars = sum(1 for b in s if b & 0xC0 != 0x80)
        if len(occ[s]) < min_occ or chars < min_len:
            continue
        doc_ids = [docs[d][0] for d in sorted({d for d, _ in occ[s]})]
        out.append(
            {
                "substring": s.decode("utf-8", errors="replace"),
                "length_chars": chars,
                "n_occurrences": len(occ[s]),
                "doc_ids": doc_ids,
            }
        )
    for rec in out:
        print(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))


if __name__ == "__main__":
    main()
