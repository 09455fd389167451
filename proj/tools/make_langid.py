#!/usr/bin/env python3
"""Extends the language-identification seed texts (data/langid/*.txt).

Each file starts with hand-written paragraphs. After the first blank line the
script writes form-like lines drawn from the synthetic lexicon, so the
trigram profiles also cover the words the synthetic pages use. Rerunning
replaces the generated block; output is deterministic.
"""
import json
import pathlib
import random

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"
LINES = 60


def main():
    lex = json.loads((DATA / "synth_lexicon.json").read_text(encoding="utf-8"))
    for lang in sorted(lex):
        path = DATA / "langid" / f"{lang}.txt"
        head = path.read_text(encoding="utf-8").split("\n\n", 1)[0].rstrip("\n")
        rng = random.Random(f"langid-{lang}")
        groups = lex[lang]
        lines = []
        for _ in range(LINES):
            kind = rng.random()
            if kind < 0.15:
                words = [rng.choice(groups["headers"])]
            elif kind < 0.55:
                words = [rng.choice(groups["keys"]), rng.choice(groups["values"])]
            else:
                words = [rng.choice(groups["fillers"]) for _ in range(rng.randint(4, 9))]
            lines.append(" ".join(words))
        path.write_text(head + "\n\n" + "\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
