#!/usr/bin/env python3
"""Dependency-parse sentences with spaCy and write CoNLL-U.

Reads one sentence per line (or the `sentence` column of a CSV with
--csv) and writes one CoNLL-U block per input sentence. Each input line is
parsed as a single sentence even if spaCy's segmenter would split it.

The shipped fixtures were produced with spaCy 2.3.9 and the English
small model 2.2.5 (PyPI package `en_core_web_sm-mirror`), which emit the
legacy ClearNLP label set (nsubjpass, auxpass, agent, prep/pobj):

    python -m venv venv
    venv/bin/pip install spacy==2.3.9 "numpy<1.24" en_core_web_sm-mirror==2.2.5
    venv/bin/python tools/scripts/parse_to_conllu.py sentences.txt > out.conllu
"""
import argparse
import csv
import sys

import spacy


def load(model):
    try:
        return spacy.load(model)
    except OSError:
        import en_core_web_sm  # the mirror package installs under this name
        return en_core_web_sm.load()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("input")
    ap.add_argument("--csv", action="store_true")
    ap.add_argument("--model", default="en_core_web_sm")
    args = ap.parse_args()

    with open(args.input, encoding="utf-8", newline="") as fh:
        if args.csv:
            sentences = [row["sentence"] for row in csv.DictReader(fh)]
        else:
            sentences = [l.strip() for l in fh if l.strip()]

    nlp = load(args.model)
    out = sys.stdout
    out.write(f"# scheme = legacy_clear\n# parser = spacy {spacy.__version__} "
              f"{nlp.meta.get('name')} {nlp.meta.get('version')}\n")
    for n, text in enumerate(sentences, 1):
        # One input line is one sentence: disable segmentation by parsing
        # the whole doc and re-rooting secondary roots under the first.
        doc = nlp(" ".join(text.split()))
        root = next(t for t in doc if t.dep_ == "ROOT")
        out.write(f"# sent_id = {n}\n# text = {doc.text}\n")
        for t in doc:
            if t.dep_ == "ROOT" and t.i != root.i:
                head, dep = root.i + 1, "parataxis"
            elif t.dep_ == "ROOT":
                head, dep = 0, "ROOT"
            else:
                head, dep = t.head.i + 1, t.dep_
            misc = "_" if t.whitespace_ else "SpaceAfter=No"
            if t.i == len(doc) - 1:
                misc = "_"
            out.write("\t".join([str(t.i + 1), t.text, t.lemma_, t.pos_, t.tag_,
                                 "_", str(head), dep, "_", misc]) + "\n")
        out.write("\n")


if __name__ == "__main__":
    main()
