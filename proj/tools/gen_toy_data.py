#!/usr/bin/env python3
"""Writes the synthetic toy dataset under data/toy/.

The language is agglutinative by construction: every word is a root followed
by zero to three suffixes, so exact gold segmentations are known.

    python3 tools/gen_toy_data.py [--out data/toy] [--seed 7]
"""

import argparse
import json
import pathlib
import random

CONSONANTS = "kgtdnpbmrlvsy"
VOWELS = "aeiou"
DERIVATIONAL = ["ka", "ri", "tanam"]
INFLECTIONAL = ["lu", "ki", "nu", "to", "lo", "du", "mu"]


def make_roots(rng, count):
    roots = set()
    while len(roots) < count:
        syllables = rng.randint(2, 3)
        roots.add("".join(rng.choice(CONSONANTS) + rng.choice(VOWELS)
                          for _ in range(syllables)))
    return sorted(roots)


def make_word(rng, roots, weights):
    root = rng.choices(roots, weights)[0]
    segments = [root]
    if rng.random() < 0.3:
        segments.append(rng.choice(DERIVATIONAL))
    for _ in range(rng.choices([0, 1, 2], [0.3, 0.5, 0.2])[0]):
        segments.append(rng.choice(INFLECTIONAL))
    return segments


def category(segments):
    if len(segments) > 1 and segments[1] in DERIVATIONAL:
        return "derivational"
    return "inflectional"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data/toy")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--sentences", type=int, default=1000)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    roots = make_roots(rng, 120)
    weights = [1.0 / (rank + 1) for rank in range(len(roots))]
    analyses = {}

    def sentences(n):
        lines = []
        for _ in range(n):
            words = []
            for _ in range(rng.randint(3, 10)):
                segs = make_word(rng, roots, weights)
                word = "".join(segs)
                analyses.setdefault(word, segs)
                words.append(word)
            lines.append(" ".join(words))
        return lines

    train = sentences(args.sentences)
    # A few exact repeats so that deduplication has something to do.
    train += train[:25]
    evaluation = sentences(200)

    (out / "corpus.txt").write_text("\n".join(train) + "\n", encoding="utf-8")
    (out / "eval.txt").write_text("\n".join(evaluation) + "\n", encoding="utf-8")

    with open(out / "lexicon.tsv", "w", encoding="utf-8") as f:
        for word in sorted(analyses):
            f.write(f"{word}\t{' '.join(analyses[word])}\n")

    # 200 gold words, a tenth of them single-morpheme.
    words = sorted(analyses)
    rng.shuffle(words)
    multi = [w for w in words if len(analyses[w]) > 1][:180]
    single = [w for w in words if len(analyses[w]) == 1][:20]
    with open(out / "gold.tsv", "w", encoding="utf-8") as f:
        for word in sorted(multi + single):
            segs = analyses[word]
            f.write(f"{word}\t{' '.join(segs)}\t{category(segs)}\n")

    manifest = {
        "corpus": ["corpus.txt"],
        "normalization": "nfc",
        "seed": 13,
        "grid": {"families": ["bpe", "unigram"], "pre_tokenizers": ["none"],
                 "vocab_sizes": [160]},
        "gold": ["gold.tsv"],
        "eval_corpus": "eval.txt",
        "alpha": 2.5,
        "output_dir": "../../build/toy_run",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n",
                                       encoding="utf-8")

    full = dict(manifest)
    full["grid"] = {
        "families": ["character", "word", "bpe", "unigram"],
        "pre_tokenizers": ["none", "lexicon:lexicon.tsv", "mdl"],
        "vocab_sizes": [64, 128],
    }
    full["output_dir"] = "../../build/toy_grid"
    full["mdl"] = {"epochs": 3}
    (out / "grid_manifest.json").write_text(json.dumps(full, indent=1) + "\n",
                                            encoding="utf-8")


if __name__ == "__main__":
    main()
