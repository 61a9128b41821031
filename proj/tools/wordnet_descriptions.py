#!/usr/bin/env python3
# Copyright 2026 The NKGE Authors
# SPDX-License-Identifier: Apache-2.0
"""Build description and name files for WN18-family datasets.

Reads WordNet 3.0 `data.{noun,verb,adj,adv}` files and writes, for every
synset offset that appears in the dataset triples:

  <out>/descriptions.txt   offset<TAB>gloss
  <out>/names.txt          offset<TAB>first lemma

Usage: wordnet_descriptions.py <wordnet-dict-dir> <dataset-dir> <out-dir>
"""
import os
import sys


def read_synsets(dict_dir):
    synsets = {}
    collisions = 0
    for pos in ("noun", "verb", "adj", "adv"):
        with open(os.path.join(dict_dir, "data." + pos), encoding="utf-8") as f:
            for line in f:
                if line.startswith("  "):
                    continue
                head, _, gloss = line.partition(" | ")
                fields = head.split()
                offset = fields[0]
                lemma = fields[4]
                if "(" in lemma:
                    lemma = lemma[: lemma.index("(")]
                if offset in synsets:
                    collisions += 1
                    continue
                synsets[offset] = (lemma.replace("_", " "), gloss.strip())
    return synsets, collisions


def main():
    dict_dir, data_dir, out_dir = sys.argv[1:4]
    synsets, collisions = read_synsets(dict_dir)
    entities = []
    seen = set()
    for split in ("train", "valid", "test"):
        with open(os.path.join(data_dir, split + ".txt"), encoding="utf-8") as f:
            for line in f:
                h, _, t = line.rstrip("\n").split("\t")
                for e in (h, t):
                    if e not in seen:
                        seen.add(e)
                        entities.append(e)
    os.makedirs(out_dir, exist_ok=True)
    missing = 0
    with open(os.path.join(out_dir, "descriptions.txt"), "w", encoding="utf-8") as d, \
            open(os.path.join(out_dir, "names.txt"), "w", encoding="utf-8") as n:
        for e in entities:
            entry = synsets.get(e)
            if entry is None:
                missing += 1
                continue
            n.write(f"{e}\t{entry[0]}\n")
            d.write(f"{e}\t{entry[1]}\n")
    print(f"entities={len(entities)} missing={missing} pos_collisions={collisions}")


if __name__ == "__main__":
    main()
