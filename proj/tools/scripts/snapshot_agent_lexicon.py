#!/usr/bin/env python3
"""Snapshot the agent-noun lexicon from WordNet 3.0 noun data.

Walks the hyponym closure (regular hyponyms only, no instances) of the
synset ``causal_agent.n.01``, which contains ``person.n.01`` and the
``agent.n.*`` senses. Every lemma of every synset in the closure is
lower-cased, underscores become spaces, and phrases longer than four words
are dropped.

Usage:
    snapshot_agent_lexicon.py /path/to/wordnet-3.0/data.noun > data/agents.txt

The WordNet 3.0 database ships inside the ``wn==0.0.23`` sdist on PyPI
(``wn/data/wordnet-3.0/data.noun``).
"""
import collections
import sys

ROOT_LEMMA = "causal_agent"
ROOT_GLOSS_PREFIX = "any entity that produces an effect"


def parse(path):
    synsets = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("  ") or not line.strip():
                continue
            head, _, gloss = line.partition("|")
            f = head.split()
            offset = f[0]
            n_words = int(f[3], 16)
            words = [f[4 + 2 * i] for i in range(n_words)]
            pos = 4 + 2 * n_words
            n_ptrs = int(f[pos])
            pos += 1
            hyponyms = []
            for _ in range(n_ptrs):
                sym, target, tpos = f[pos], f[pos + 1], f[pos + 2]
                pos += 4
                if sym == "~" and tpos == "n":
                    hyponyms.append(target)
            synsets[offset] = (words, hyponyms, gloss.strip())
    return synsets


def main():
    synsets = parse(sys.argv[1])
    roots = [o for o, (w, _, g) in synsets.items()
             if ROOT_LEMMA in w and g.startswith(ROOT_GLOSS_PREFIX)]
    if len(roots) != 1:
        sys.exit("could not locate causal_agent.n.01")
    seen = set(roots)
    queue = collections.deque(roots)
    while queue:
        for child in synsets[queue.popleft()][1]:
            if child not in seen:
                seen.add(child)
                queue.append(child)
    phrases = set()
    for offset in seen:
        for w in synsets[offset][0]:
            w = w.split("(")[0]  # adjective markers such as "(a)"
            phrase = " ".join(w.lower().replace("_", " ").split())
            if phrase and len(phrase.split()) <= 4:
                phrases.add(phrase)
    print("# Agent-noun lexicon: lemmas in the hyponym closure of")
    print("# WordNet 3.0 causal_agent.n.01 (includes person.n.01).")
    print("# Generated by tools/scripts/snapshot_agent_lexicon.py; do not hand-edit.")
    print(f"# synsets={len(seen)} phrases={len(phrases)}")
    for p in sorted(phrases):
        print(p)


if __name__ == "__main__":
    main()
