#!/usr/bin/env python3
"""Writes the bundled toy knowledge graph.

Entities carry hidden 4-d coordinates and every relation is a translation in
that space: (h, r, t) holds when t is one of the points nearest h + v_r. This
makes the graph learnable by translation models. Descriptions mention the
names of a few related entities so semantic neighbors exist; a handful of
entities have no description.

usage: make_toy_dataset.py <out-dir>
"""

import random
import sys
from pathlib import Path

WORDS = """amber basalt cedar delta ember fjord garnet harbor iris jasper
kelp lagoon marble nectar onyx pebble quartz raven sable tundra umber
violet willow xenon yarrow zephyr acorn birch coral dune elm flint granite
hazel indigo juniper kestrel lichen maple nettle obsidian pine quill reed
sorrel thistle upland vale wren yew""".split()

RELATIONS = ["flows_into", "borders", "grows_near", "feeds", "shelters"]


def main(out_dir: str) -> None:
    rng = random.Random(20261014)
    names = WORDS[:50]
    coords = {n: [rng.uniform(-1, 1) for _ in range(4)] for n in names}
    shifts = {r: [rng.uniform(-0.6, 0.6) for _ in range(4)] for r in RELATIONS}

    triples = []
    for h in names:
        for r in RELATIONS:
            target = [a + b for a, b in zip(coords[h], shifts[r])]
            ranked = sorted(
                (sum((x - y) ** 2 for x, y in zip(coords[t], target)), t)
                for t in names
                if t != h
            )
            for _, t in ranked[:2]:
                triples.append((h, r, t))
    triples = sorted(set(triples))
    rng.shuffle(triples)
    valid, test, train = triples[:25], triples[25:50], triples[50:450]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for split, rows in (("train", train), ("valid", valid), ("test", test)):
        with open(out / f"{split}.txt", "w") as f:
            for h, r, t in rows:
                f.write(f"{h}\t{r}\t{t}\n")

    related = {n: set() for n in names}
    for h, _, t in train:
        related[h].add(t)
    with open(out / "descriptions.txt", "w") as f:
        for i, n in enumerate(names):
            if i % 10 == 9:
                continue
            pool = sorted(related[n]) or [m for m in names if m != n]
            mentions = rng.sample(pool, min(2, len(pool)))
            other = rng.choice([m for m in names if m != n])
            f.write(
                f"{n}\tThe {n} site lies beside {mentions[0]}"
                + (f" and {mentions[-1]}" if len(mentions) > 1 else "")
                + f", far from any {other}.\n"
            )


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(sys.argv[1])
