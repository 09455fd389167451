#!/usr/bin/env python3
"""Builds the small multilingual unigram vocabulary fixture (data/vocab.tsv).

Pieces: every character of the synthetic-form lexicon and the language seed
texts' letters, as many lexicon words as fit, and the most frequent character n-grams
of the seed texts; lexicon words are admitted by frequency, then length,
until the n-gram reserve is reached, up to 507 pieces (512 ids with the five specials).
Scores are log relative frequencies, so whole words beat their spellings.
"""
import collections
import json
import math
import pathlib
import re

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"
BUDGET = 507
NGRAM_RESERVE = 48


def main():
    lex = json.loads((DATA / "synth_lexicon.json").read_text(encoding="utf-8"))
    words = collections.Counter()
    chars = collections.Counter()
    for lang in sorted(lex):
        for group in ("headers", "keys", "values", "fillers"):
            for phrase in lex[lang][group]:
                for w in phrase.split():
                    words[w] += 1
                    chars.update(w)
    chars[":"] += 50
    seed = collections.Counter()
    for path in sorted((DATA / "langid").glob("*.txt")):
        text = path.read_text(encoding="utf-8")
        for w in re.findall(r"[^\s,.;、。，]+", text):
            for n in (2, 3):
                for i in range(len(w) - n + 1):
                    seed[w[i:i + n]] += 1

    pieces = {}
    total_c = sum(chars.values())
    for c, n in chars.items():
        pieces[c] = math.log(n / total_c) - 3.0
    total_w = sum(words.values())
    ranked = sorted((w for w in words if len(w) > 1), key=lambda w: (-words[w], -len(w), w))
    for w in ranked:
        if len(pieces) >= BUDGET - NGRAM_RESERVE:
            break
        pieces[w] = math.log(words[w] / total_w)
    total_s = sum(seed.values())
    for g, n in sorted(seed.items(), key=lambda kv: (-kv[1], kv[0])):
        if len(pieces) >= BUDGET:
            break
        if g not in pieces and n >= 2:
            pieces[g] = math.log(n / total_s) - 1.0
    out = DATA / "vocab.tsv"
    with out.open("w", encoding="utf-8") as f:
        for p, s in sorted(pieces.items(), key=lambda kv: (-kv[1], kv[0])):
            f.write(f"{p}\t{s:.6f}\n")
    print(f"wrote {len(pieces)} pieces to {out}")


if __name__ == "__main__":
    main()
