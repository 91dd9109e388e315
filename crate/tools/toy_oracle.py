#!/usr/bin/env python3
"""Brute-force predictor values for the toy bundle.

Written straight from the formulas with no shared code, so the Rust
implementation can be checked against it. Output goes to
crates/core/tests/fixtures/toy_oracle.tsv.

    python3 tools/toy_oracle.py
"""
import json
import math
import os
import re

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
TOY = os.path.join(ROOT, "data", "toy")
OUT = os.path.join(ROOT, "crates", "core", "tests", "fixtures", "toy_oracle.tsv")

MU = 1000.0
DEPTH = 1000
K_FB = 10
WIG_K = 5
NQC_K = 10
UEF_M = 10


def tokens(text):
    return [t for t in re.split(r"[^0-9a-z]+", text.lower()) if t]


docs = {}
with open(os.path.join(TOY, "docs.jsonl")) as f:
    for line in f:
        if line.strip():
            d = json.loads(line)
            docs[d["id"]] = tokens(d["text"])

queries = []
with open(os.path.join(TOY, "queries.tsv")) as f:
    for line in f:
        if line.strip():
            qid, text = line.rstrip("\n").split("\t", 1)
            queries.append((qid, tokens(text)))

relevant = {}
with open(os.path.join(TOY, "qrels.txt")) as f:
    for line in f:
        parts = line.split()
        if len(parts) == 4 and int(parts[3]) > 0:
            relevant.setdefault(parts[0], set()).add(parts[2])

lexicon = {}
with open(os.path.join(TOY, "lexicon.tsv")) as f:
    for line in f:
        if line.strip() and not line.startswith("#"):
            term, total, noun = line.split("\t")
            lexicon[term] = (float(total), float(noun))

N = len(docs)
C = sum(len(t) for t in docs.values())


def tf(term, doc):
    return docs[doc].count(term)


def cf(term):
    return sum(tf(term, d) for d in docs)


def df(term):
    return sum(1 for d in docs if term in docs[d])


def p_doc(term, doc):
    return (tf(term, doc) + MU * cf(term) / C) / (len(docs[doc]) + MU)


def score(q, doc):
    return sum(math.log(p_doc(t, doc)) for t in q if cf(t) > 0)


def pop_std(xs):
    m = sum(xs) / len(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))


def pearson(a, b):
    ma, mb = sum(a) / len(a), sum(b) / len(b)
    sab = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    saa = sum((x - ma) ** 2 for x in a)
    sbb = sum((y - mb) ** 2 for y in b)
    return sab / math.sqrt(saa * sbb)


rows = []
for qid, q in queries:
    scored = sorted({t for t in q if df(t) > 0})
    idf = [math.log(N / df(t)) for t in scored]
    scq = [(1 + math.log(cf(t))) * math.log(1 + N / df(t)) for t in scored]
    var = []
    for t in scored:
        w = [(1 + math.log(tf(t, d))) * math.log(N / df(t)) for d in sorted(docs) if tf(t, d) > 0]
        var.append(pop_std(w))
    senses = [lexicon[t] for t in sorted(set(q)) if t in lexicon]
    avp = sum(s[0] for s in senses) / len(senses) if senses else 0.0
    avnp = sum(s[1] for s in senses) / len(senses) if senses else 0.0

    candidates = [d for d in docs if any(tf(t, d) > 0 for t in q)]
    ranked = sorted(((score(q, d), d) for d in candidates), key=lambda x: (-x[0], x[1]))[:DEPTH]
    hits, ap_sum = 0, 0.0
    for i, (_, d) in enumerate(ranked):
        if d in relevant.get(qid, ()):
            hits += 1
            ap_sum += hits / (i + 1)
    ap = ap_sum / len(relevant[qid])

    coll = sum(math.log(cf(t) / C) for t in q if cf(t) > 0)
    q_len = sum(1 for t in q if cf(t) > 0)

    fb = ranked[:K_FB]
    top = max(s for s, _ in fb)
    weights = [math.exp(s - top) for s, _ in fb]
    z = sum(weights)
    weights = [w / z for w in weights]
    vocab = sorted({t for _, d in fb for t in docs[d]})
    rm = {t: sum(w * p_doc(t, d) for w, (_, d) in zip(weights, fb)) for t in vocab}
    mass = sum(rm.values())
    rm = {t: p / mass for t, p in rm.items()}
    clarity = sum(p * math.log2(p / (cf(t) / C)) for t, p in rm.items())

    k = min(WIG_K, len(ranked))
    wig = sum(s - coll for s, _ in ranked[:k]) / (k * math.sqrt(q_len))
    top_nqc = [s for s, _ in ranked[:NQC_K]]
    nqc = pop_std(top_nqc) / abs(coll) if len(top_nqc) >= 2 else 0.0

    m_docs = ranked[:UEF_M]
    rm_scores = [sum(p * math.log(p_doc(t, d)) for t, p in rm.items()) for _, d in m_docs]
    sim = pearson([s for s, _ in m_docs], rm_scores)

    rows.append(
        [qid, ap,
         sum(idf) / len(idf), max(idf),
         sum(scq), sum(scq) / len(scq), max(scq),
         sum(var), sum(var) / len(var), max(var),
         avp, avnp,
         clarity, wig, nqc, sim * nqc, sim * wig, sim * clarity, sum(rm.values())]
    )

header = ["query_id", "AP", "AvgIDF", "MaxIDF", "SumSCQ", "AvgSCQ", "MaxSCQ", "SumVAR", "AvgVAR",
          "MaxVAR", "AvP", "AvNP", "Clarity", "WIG", "NQC", "UEF-NQC", "UEF-WIG", "UEF-Clarity", "rm_mass"]
os.makedirs(os.path.dirname(OUT), exist_ok=True)
with open(OUT, "w") as f:
    f.write("# generated by tools/toy_oracle.py\n")
    f.write("\t".join(header) + "\n")
    for r in rows:
        f.write("\t".join([r[0]] + [repr(float(v)) for v in r[1:]]) + "\n")
