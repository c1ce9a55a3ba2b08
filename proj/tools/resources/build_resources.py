#!/usr/bin/env python3
"""Regenerates the bundled desk-scale resources under data/.

Inputs:
  --wordnet DIR   a full WordNet 3.x database directory (index.*, data.*, *.exc)

Outputs (under --out, default data/):
  toy/train.csv, toy/test.csv   templated sentiment corpus (fixed seed)
  wordnet/                      closed WordNet-format slice covering the corpus
  embeddings/toy-vectors.txt    PPMI+SVD word vectors derived from WordNet glosses
  stopwords.txt is hand-maintained and not written here.

The full WordNet 3.1 database is published on npm as `wordnet-db`, the
exception lists as `wndb-with-exceptions`.
"""

import argparse
import collections
import csv
import os
import random
import re

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import svds

POS_FILES = {"n": "noun", "v": "verb", "a": "adj", "r": "adv"}

# --------------------------------------------------------------------------
# toy corpus

SUBJECTS = [
    "the movie", "this film", "the plot", "the acting", "the script",
    "the story", "the cast", "the direction", "the soundtrack", "the dialogue",
    "the ending", "the performance", "the picture", "the production",
    "the humor", "the characters", "the photography", "the lead actor",
    "the music", "the pacing", "the sequel", "the premise",
]
POS_ADJ = [
    "good", "great", "wonderful", "superb", "brilliant", "excellent",
    "delightful", "charming", "moving", "clever", "funny", "beautiful",
    "powerful", "engaging", "fresh", "amazing", "astonishing", "splendid",
    "gripping", "touching", "witty", "graceful", "lively", "warm", "solid",
    "pleasant", "memorable", "stunning", "enjoyable", "marvelous",
]
NEG_ADJ = [
    "bad", "awful", "terrible", "dull", "boring", "tedious", "weak", "clumsy",
    "stupid", "ugly", "painful", "predictable", "slow", "mediocre", "poor",
    "dreadful", "silly", "bland", "flat", "tiresome", "messy", "shallow",
    "annoying", "lame", "stale", "pointless", "horrible", "cheap", "empty",
    "hollow",
]
POS_VERB = ["loved", "enjoyed", "admired", "adored", "praised", "liked",
            "treasured", "cherished", "relished", "savored"]
NEG_VERB = ["hated", "disliked", "regretted", "loathed", "despised",
            "endured", "resented", "detested"]
POS_NOUN = ["joy", "triumph", "delight", "gem", "masterpiece", "treat",
            "pleasure", "success", "wonder", "marvel"]
NEG_NOUN = ["mess", "disaster", "failure", "bore", "waste", "letdown",
            "disappointment", "chore", "fiasco", "flop"]
# words from published adversarial examples, kept resolvable in the slice
EXTRA_WORDS = ["dog", "labour", "involved", "layered", "richness", "imagery",
               "madness", "light", "plucky", "destined", "new", "going",
               "make", "splash", "greater", "eccentrics"]
INTENS = ["really", "truly", "very", "quite", "simply", "utterly",
          "remarkably", "incredibly", "fairly", "rather"]
FILLERS = ["from start to finish", "for the whole family",
           "on the big screen", "in every scene", "at times", "throughout",
           "by the end", "in the second half", "for most of its length",
           "despite the budget"]


def _sentence(rng, label):
    adj = POS_ADJ if label == "pos" else NEG_ADJ
    other = NEG_ADJ if label == "pos" else POS_ADJ
    verb = POS_VERB if label == "pos" else NEG_VERB
    noun = POS_NOUN if label == "pos" else NEG_NOUN
    s1, s2 = rng.sample(SUBJECTS, 2)
    a1, a2 = rng.sample(adj, 2)
    t = rng.randrange(9)
    if t == 0:
        text = f"{s1} is {rng.choice(INTENS)} {a1}."
    elif t == 1:
        text = f"{s1} was {a1} and {a2}."
    elif t == 2:
        text = f"I {rng.choice(verb)} {s1}, {rng.choice(INTENS)} {a1} {rng.choice(FILLERS)}."
    elif t == 3:
        text = f"What a {rng.choice(noun)}! {s1.capitalize()} felt {a1}."
    elif t == 4:
        # mixed clause: the second clause carries the label
        text = f"{s1} was {rng.choice(other)}, but {s2} is {rng.choice(INTENS)} {a1}."
    elif t == 5:
        text = f"Honestly, {s1} was a {rng.choice(noun)} {rng.choice(FILLERS)}."
    elif t == 6:
        text = f"{s1} felt {a1} and {s2} was {a2} {rng.choice(FILLERS)}."
    elif t == 7:
        text = f"We {rng.choice(verb)} it. {s1.capitalize()} is {a1}."
    else:
        text = f"{s1} is {a1}, {s2} is {rng.choice(other)}, and overall it is {a2}."
    return text[0].upper() + text[1:]


def build_corpus(out_dir, n_train=800, n_test=200):
    os.makedirs(os.path.join(out_dir, "toy"), exist_ok=True)
    for name, n, seed in (("train", n_train, 7), ("test", n_test, 11)):
        rng = random.Random(seed)
        rows = []
        for _ in range(n):
            label = rng.choice(["pos", "neg"])
            rows.append((_sentence(rng, label), label))
        with open(os.path.join(out_dir, "toy", f"{name}.csv"), "w",
                  newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["text", "label"])
            w.writerows(rows)
    return os.path.join(out_dir, "toy")


def corpus_words(toy_dir):
    words = set()
    for name in ("train.csv", "test.csv"):
        with open(os.path.join(toy_dir, name), encoding="utf-8") as f:
            for row in csv.DictReader(f):
                words.update(w.lower() for w in re.findall(r"[A-Za-z]+", row["text"]))
    return words

# --------------------------------------------------------------------------
# WordNet reading (independent of the C++ parser)

def read_wordnet(wn_dir):
    index = {}      # (lemma, pos) -> [offsets]
    data = {}       # (pos, offset) -> (line, [lemmas])
    exc = {}        # pos -> {inflected: [bases]}
    header = []
    for pos, name in POS_FILES.items():
        with open(os.path.join(wn_dir, "index." + name), encoding="utf-8") as f:
            for line in f:
                if line.startswith("  "):
                    continue
                parts = line.split()
                lemma, synset_cnt, p_cnt = parts[0], int(parts[2]), int(parts[3])
                offsets = parts[6 + p_cnt: 6 + p_cnt + synset_cnt]
                index[(lemma, pos)] = offsets
        with open(os.path.join(wn_dir, "data." + name), encoding="utf-8") as f:
            for line in f:
                if line.startswith("  "):
                    if pos == "n":
                        header.append(line)
                    continue
                parts = line.split()
                w_cnt = int(parts[3], 16)
                words = [re.sub(r"\(.*\)$", "", parts[4 + 2 * i]).lower()
                         for i in range(w_cnt)]
                data[(pos, parts[0])] = (line, parts, words)
        exc[pos] = {}
        with open(os.path.join(wn_dir, name + ".exc"), encoding="utf-8") as f:
            for line in f:
                parts = line.split()
                if len(parts) >= 2:
                    exc[pos].setdefault(parts[0], []).extend(parts[1:])
    return index, data, exc, header


RULES = {
    "n": [("s", ""), ("ses", "s"), ("xes", "x"), ("zes", "z"), ("ches", "ch"),
          ("shes", "sh"), ("ies", "y")],
    "v": [("s", ""), ("ies", "y"), ("es", "e"), ("es", ""), ("ed", "e"),
          ("ed", ""), ("ing", "e"), ("ing", "")],
    "a": [("er", ""), ("est", ""), ("er", "e"), ("est", "e")],
    "r": [],
}


def morphy(index, exc, word, pos):
    if word in exc[pos]:
        forms = [word] + exc[pos][word]
    else:
        forms = [word] + [word[: -len(s)] + r for s, r in RULES[pos]
                          if word.endswith(s)]
    return {f for f in forms if (f, pos) in index}


def synonyms(index, data, lemma):
    out = set()
    for pos in POS_FILES:
        for off in index.get((lemma, pos), []):
            out.update(data[(pos, off)][2])
    out.discard(lemma)
    return {w for w in out if "_" not in w}

# --------------------------------------------------------------------------
# WordNet slice


def build_slice(wn_dir, words, out_dir):
    index, data, exc, header = read_wordnet(wn_dir)
    keep = set()  # (pos, offset)
    for w in words:
        for pos in POS_FILES:
            for lemma in morphy(index, exc, w, pos):
                for off in index[(lemma, pos)]:
                    keep.add((pos, off))
    os.makedirs(out_dir, exist_ok=True)
    new_offsets = {}
    members = collections.defaultdict(list)  # (lemma,pos) -> [old offsets] in index order
    for (lemma, pos), offs in index.items():
        kept = [o for o in offs if (pos, o) in keep]
        if kept:
            members[(lemma, pos)] = kept
    for pos, name in POS_FILES.items():
        synsets = sorted(o for p, o in keep if p == pos)
        # pointers are dropped: the slice is not closed under relations
        bodies = []
        for off in synsets:
            line, parts, _ = data[(pos, off)]
            w_cnt = int(parts[3], 16)
            head = parts[1:4 + 2 * w_cnt]
            gloss = line.split(" | ", 1)[1].rstrip("\n") if " | " in line else ""
            bodies.append((off, " ".join(head) + " 000 | " + gloss))
        hdr = "".join(header)
        pos_bytes = len(hdr.encode("utf-8"))
        lines = []
        for off, body in bodies:
            new_offsets[(pos, off)] = "%08d" % pos_bytes
            text = "%08d %s  \n" % (pos_bytes, body)
            lines.append(text)
            pos_bytes += len(text.encode("utf-8"))
        with open(os.path.join(out_dir, "data." + name), "w", encoding="utf-8") as f:
            f.write(hdr)
            f.writelines(lines)
        with open(os.path.join(out_dir, "index." + name), "w", encoding="utf-8") as f:
            f.write(hdr)
            for (lemma, p) in sorted(k for k in members if k[1] == pos):
                offs = [new_offsets[(pos, o)] for o in members[(lemma, p)]]
                f.write("%s %s %d 0 %d 0 %s  \n" % (lemma, pos, len(offs), len(offs), " ".join(offs)))
        with open(os.path.join(out_dir, name + ".exc"), "w", encoding="utf-8") as f:
            for infl in sorted(exc[pos]):
                bases = [b for b in exc[pos][infl] if (b, pos) in members]
                if bases:
                    f.write("%s %s\n" % (infl, " ".join(bases)))
    return index, data, exc

# --------------------------------------------------------------------------
# embeddings


def build_embeddings(wn_dir, targets, out_path, dim=50, window=4):
    index, data, exc, _ = read_wordnet(wn_dir)
    targets = sorted(targets)
    tid = {w: i for i, w in enumerate(targets)}
    ctx = {}
    rows, cols, vals = [], [], []

    def add(t, c, v):
        j = ctx.setdefault(c, len(ctx))
        rows.append(tid[t]); cols.append(j); vals.append(v)

    for (pos, off), (line, parts, words) in data.items():
        gloss = line.split(" | ", 1)[1] if " | " in line else ""
        seq = []
        for w in words:
            seq.extend(w.split("_"))
        seq.extend(x.lower() for x in re.findall(r"[A-Za-z]+", gloss))
        for i, t in enumerate(seq):
            if t not in tid:
                continue
            for j in range(max(0, i - window), min(len(seq), i + window + 1)):
                if j != i:
                    add(t, "w:" + seq[j], 1.0)
        for w in words:
            if w in tid:
                add(w, "s:" + pos + off, 4.0)
    m = coo_matrix((vals, (rows, cols)), shape=(len(targets), len(ctx))).tocsr()
    m.sum_duplicates()
    total = m.sum()
    row_sum = np.asarray(m.sum(axis=1)).ravel()
    col_sum = np.asarray(m.sum(axis=0)).ravel() ** 0.75
    col_sum = col_sum / col_sum.sum() * total
    m = m.tocoo()
    pmi = np.log(m.data * total / (row_sum[m.row] * col_sum[m.col]))
    keep = pmi > 0
    ppmi = coo_matrix((pmi[keep], (m.row[keep], m.col[keep])), shape=m.shape).tocsr()
    u, s, _ = svds(ppmi, k=dim, random_state=0)
    order = np.argsort(-s)
    vec = u[:, order] * np.sqrt(s[order])
    # fix the SVD sign ambiguity so reruns are stable
    for k in range(dim):
        if vec[np.argmax(np.abs(vec[:, k])), k] < 0:
            vec[:, k] = -vec[:, k]
    norms = np.linalg.norm(vec, axis=1)
    present = norms > 0
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as f:
        f.write("%d %d\n" % (int(present.sum()), dim))
        for w, v, n in zip(targets, vec, norms):
            if n > 0:
                f.write(w + " " + " ".join("%.6f" % x for x in v / n) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wordnet", required=True)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "..", "data"))
    args = ap.parse_args()
    toy = build_corpus(args.out)
    words = corpus_words(toy) | set(EXTRA_WORDS)
    index, data, exc = build_slice(args.wordnet, words, os.path.join(args.out, "wordnet"))
    targets = set(words)
    for w in words:
        for pos in POS_FILES:
            for lemma in morphy(index, exc, w, pos):
                targets.add(lemma)
                targets.update(s for s in synonyms(index, data, lemma) if s.isalpha())
    build_embeddings(args.wordnet, targets, os.path.join(args.out, "embeddings", "toy-vectors.txt"))
    # copyright notice travels with the derived database
    with open(os.path.join(args.wordnet, "LICENSE"), encoding="utf-8") as src, \
            open(os.path.join(args.out, "wordnet", "LICENSE"), "w", encoding="utf-8") as dst:
        dst.write(src.read())


if __name__ == "__main__":
    main()
