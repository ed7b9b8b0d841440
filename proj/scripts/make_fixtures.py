#!/usr/bin/env python3
"""Derive the small NER and classification fixtures under tests/data from the
bundled treebank test split.

ner/corpus.txt        two-column token/tag file; runs of PROPN tokens become
                      entities (LOC when the last token carries a spatial
                      case, PER for two-token runs, ORG otherwise)
ner/annotation.conllu the same sentences with their UPOS and features
cf/corpus.txt         "label<TAB>tokens"; label 1 when the sentence has at
                      least two ADJ tokens
cf/annotation.conllu  the companion CoNLL-U

Usage: scripts/make_fixtures.py [tests/data]
"""

import sys
from pathlib import Path

SPATIAL = {"Case=Loc", "Case=Abl", "Case=Dat"}


def read_conllu(path):
    sentences, block = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            if block:
                sentences.append(block)
            block = []
        else:
            block.append(line)
    if block:
        sentences.append(block)
    return sentences


def words(block):
    out = []
    for line in block:
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if "-" in cols[0] or "." in cols[0]:
            continue
        out.append(cols)
    return out


def ner_tags(toks):
    tags = ["O"] * len(toks)
    i = 0
    while i < len(toks):
        if toks[i][3] != "PROPN":
            i += 1
            continue
        j = i
        while j + 1 < len(toks) and toks[j + 1][3] == "PROPN":
            j += 1
        feats = set(toks[j][5].split("|"))
        cls = "LOC" if feats & SPATIAL else "PER" if j == i + 1 else "ORG"
        tags[i] = "B-" + cls
        for k in range(i + 1, j + 1):
            tags[k] = "I-" + cls
        i = j + 1
    return tags


def main():
    root = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
    source = read_conllu(root / "twt" / "test.conllu")

    ner = [b for b in source if any(w[3] == "PROPN" for w in words(b))][:80]
    (root / "ner").mkdir(exist_ok=True)
    with open(root / "ner" / "corpus.txt", "w", encoding="utf-8") as f:
        for b in ner:
            toks = words(b)
            for w, t in zip(toks, ner_tags(toks)):
                f.write(f"{w[1]}\t{t}\n")
            f.write("\n")
    with open(root / "ner" / "annotation.conllu", "w", encoding="utf-8") as f:
        for b in ner:
            f.write("\n".join(b) + "\n\n")

    cf = source[:100]
    (root / "cf").mkdir(exist_ok=True)
    with open(root / "cf" / "corpus.txt", "w", encoding="utf-8") as f:
        for b in cf:
            toks = words(b)
            label = int(sum(w[3] == "ADJ" for w in toks) >= 2)
            f.write(f"{label}\t{' '.join(w[1] for w in toks)}\n")
    with open(root / "cf" / "annotation.conllu", "w", encoding="utf-8") as f:
        for b in cf:
            f.write("\n".join(b) + "\n\n")


if __name__ == "__main__":
    main()
