#!/usr/bin/env python3
"""Regenerates crates/core/data/sample_{train,test}.tsv.

The bundled corpus is synthetic: four topics over a made-up lexicon of
syllable words, so it carries no licensing constraints. Each document mixes
shared filler words with words from its own topic and a little cross-topic
noise. Output is deterministic.
"""
import random
from pathlib import Path

SYLLABLES = ["ka", "lo", "mi", "ren", "to", "sa", "vi", "dor", "pel", "nu",
             "fa", "ri", "gos", "tem", "bal", "cu", "zan", "ho"]
TOPICS = ["harbor", "orchard", "foundry", "library"]
N_COMMON = 500
N_TOPIC = 700
N_TRAIN = 2000
N_TEST = 500


def lexicon(rng):
    words = set()
    while len(words) < N_COMMON + N_TOPIC * len(TOPICS):
        n = rng.choice([2, 2, 3, 3, 4])
        words.add("".join(rng.choice(SYLLABLES) for _ in range(n)))
    words = sorted(words)
    rng.shuffle(words)
    common = words[:N_COMMON]
    topic = [words[N_COMMON + i * N_TOPIC:N_COMMON + (i + 1) * N_TOPIC] for i in range(len(TOPICS))]
    return common, topic


def zipf_pick(rng, words, a=1.1):
    weights = [1.0 / (r + 1) ** a for r in range(len(words))]
    return rng.choices(words, weights=weights)[0]


def document(rng, common, topic, t):
    length = rng.randint(18, 40)
    out = []
    for _ in range(length):
        u = rng.random()
        if u < 0.55:
            out.append(zipf_pick(rng, common))
        elif u < 0.92:
            out.append(zipf_pick(rng, topic[t], 0.9))
        else:
            out.append(zipf_pick(rng, topic[rng.randrange(len(TOPICS))], 0.9))
    return " ".join(out)


def main():
    rng = random.Random(20231017)
    common, topic = lexicon(rng)
    root = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"
    for name, n in [("sample_train.tsv", N_TRAIN), ("sample_test.tsv", N_TEST)]:
        lines = []
        for _ in range(n):
            t = rng.randrange(len(TOPICS))
            lines.append(f"{TOPICS[t]}\t{document(rng, common, topic, t)}")
        (root / name).write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
