#!/usr/bin/env python3
"""Build the Turkish evaluation subset under tests/data/twt from the Google
Turkish Web Treebank (Apache-2.0, distributed as the `turkish-treebanks` wheel).

The treebank uses the Google universal tagset and its own morphology names, so
tags and features are mapped onto UD names:

  UPOS:  CONJ->CCONJ, PRT->PART, ONOM->INTJ, AFFIX->X, NOUN+Proper=True->PROPN
  feats: PersonNumber  -> Person + Number  (A3sg -> Person=3|Number=Sing; a verbal
                                            V-agreement overrides a nominal one)
         Possessive    -> Poss    (value kept, Pnon dropped)
         Case          -> Case    (Bare -> Nom)
         Derivation    -> VerbForm (value kept)
         TenseAspectMood -> Tense (value kept)
         Copula        -> Mood    (value kept)
         Polarity      -> Polarity
         DeterminerType -> PronType
         NumberType    -> NumType
  Everything else (Proper, Temporal, Apostrophe, ComplementType, ...) is dropped.

Sentences whose heads do not form a single-rooted tree are skipped. The
remaining sentences are shuffled with a fixed seed and cut into train/dev/test.

usage: prepare_twt.py path/to/turkish_treebanks-*.whl out_dir [--train 500 --dev 300 --test 300]
"""
import argparse
import io
import os
import random
import zipfile

UPOS_MAP = {"CONJ": "CCONJ", "PRT": "PART", "ONOM": "INTJ", "AFFIX": "X"}
RENAME = {
    "Possessive": "Poss",
    "Case": "Case",
    "Derivation": "VerbForm",
    "TenseAspectMood": "Tense",
    "Copula": "Mood",
    "Polarity": "Polarity",
    "DeterminerType": "PronType",
    "NumberType": "NumType",
}


def map_feats(raw):
    if raw == "_":
        return {}, False
    out = {}
    proper = False
    verbal = None
    for pair in raw.split("|"):
        name, _, value = pair.partition("=")
        if name == "Proper":
            proper = value == "True"
        elif name == "PersonNumber":
            person, number = value[1], ("Sing" if value.endswith("sg") else "Plur")
            if value.startswith("V"):
                verbal = (person, number)
            elif verbal is None:
                out["Person"], out["Number"] = person, number
        elif name in RENAME:
            if name == "Possessive" and value == "Pnon":
                continue
            if name == "Case" and value == "Bare":
                value = "Nom"
            out[RENAME[name]] = value
    if verbal is not None:
        out["Person"], out["Number"] = verbal
    return out, proper


def is_tree(heads):
    n = len(heads)
    if sum(1 for h in heads if h == 0) != 1:
        return False
    for start in range(1, n + 1):
        seen, cur = set(), start
        while cur != 0:
            if cur in seen or cur > n:
                return False
            seen.add(cur)
            cur = heads[cur - 1]
    return True


def read_blocks(text):
    block = []
    for line in text.splitlines():
        if not line.strip():
            if block:
                yield block
            block = []
        else:
            block.append(line)
    if block:
        yield block


def convert(block):
    comments, rows = [], []
    for line in block:
        if line.startswith("#"):
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10 or "-" in cols[0] or "." in cols[0]:
            continue
        feats, proper = map_feats(cols[5])
        upos = UPOS_MAP.get(cols[3], cols[3])
        if upos == "NOUN" and proper:
            upos = "PROPN"
        cols[3] = upos
        cols[5] = "|".join(f"{k}={feats[k]}" for k in sorted(feats)) or "_"
        rows.append(cols)
    heads = [int(r[6]) for r in rows]
    if not rows or not is_tree(heads):
        return None
    return "\n".join(comments + ["\t".join(r) for r in rows]) + "\n"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wheel")
    ap.add_argument("out_dir")
    ap.add_argument("--train", type=int, default=500)
    ap.add_argument("--dev", type=int, default=300)
    ap.add_argument("--test", type=int, default=300)
    ap.add_argument("--seed", type=int, default=20210601)
    args = ap.parse_args()

    sentences, skipped = [], 0
    with zipfile.ZipFile(args.wheel) as z:
        for name in ("data/web.conllu", "data/wiki.conllu"):
            text = io.TextIOWrapper(z.open(name), encoding="utf-8").read()
            for block in read_blocks(text):
                s = convert(block)
                if s is None:
                    skipped += 1
                else:
                    sentences.append(s)
    random.Random(args.seed).shuffle(sentences)
    os.makedirs(args.out_dir, exist_ok=True)
    start = 0
    for split, size in (("train", args.train), ("dev", args.dev), ("test", args.test)):
        with open(os.path.join(args.out_dir, f"{split}.conllu"), "w", encoding="utf-8") as f:
            f.write("\n".join(sentences[start:start + size]) + "\n")
        start += size
    print(f"kept {len(sentences)} sentences, skipped {skipped} non-tree sentences")


if __name__ == "__main__":
    main()
