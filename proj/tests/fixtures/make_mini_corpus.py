#!/usr/bin/env python3
"""Writes the mini corpus and its expected pipeline counts.

The corpus is built from known quote placements, so clusters, edges, dropped
wire copies and per-token volume follow from the construction. Run from any
directory; output goes next to this script under mini/.
"""

import json
import os
import random
from datetime import datetime, timedelta, timezone

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "mini")
SEED = 20130301

rng = random.Random(SEED)

CONS = "bdfgklmprstvz"
VOWELS = "aeiou"


def make_vocab(n):
    words = set()
    while len(words) < n:
        k = rng.randint(2, 4)
        words.add("".join(rng.choice(CONS) + rng.choice(VOWELS) for _ in range(k)))
    return sorted(words)


VOCAB = make_vocab(4000)
SPEECH = VOCAB[:2000]
FILLER = VOCAB[2000:3600]
JUNK = VOCAB[3600:]

BASE = datetime(2013, 3, 1, 15, 0, 0, tzinfo=timezone.utc)


def iso(t):
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def sentence_text(words):
    out, k = [], 0
    while k < len(words):
        n = min(rng.randint(7, 11), len(words) - k)
        chunk = words[k:k + n]
        out.append(chunk[0].capitalize() + " " + " ".join(chunk[1:]) + "." if n > 1 else chunk[0].capitalize() + ".")
        k += n
    return " ".join(out)


def speech_words(n):
    ws = []
    for _ in range(n):
        r = rng.random()
        ws.append("not" if r < 0.02 else "don't" if r < 0.035 else rng.choice(SPEECH))
    return ws


def levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


# ---------------------------------------------------------------- transcripts

transcripts = []
for t in range(6):
    tid = "t%d" % (t + 1)
    when = BASE + timedelta(days=5 * t)
    segments, tokens = [], []  # tokens: (word, indexed)
    seg_info = []  # (segment start, words) of president segments
    for p in range(5):
        words = speech_words(rng.randint(55, 70))
        seg_info.append((len(tokens), words))
        segments.append({"speaker": "OBAMA", "text": sentence_text(words)})
        tokens += [(w, True) for w in words]
        if p % 2 == 0:
            segments.append({"speaker": "AUDIENCE", "text": "(Applause.)"})
            tokens.append(("applause", False))
        else:
            q = [rng.choice(SPEECH) for _ in range(rng.randint(12, 18))]
            segments.append({"speaker": "Q", "text": "Mr. President, " + sentence_text(q)})
            tokens += [(w, False) for w in ["mr", "president"] + q]
            seg_info_q = (len(tokens) - len(q), q)
    transcripts.append({"id": tid, "when": when, "segments": segments, "tokens": tokens,
                        "speech": seg_info, "question": seg_info_q})


def span_words(tr, begin, end):
    ws = [tr["tokens"][k] for k in range(begin, end)]
    assert all(ix for _, ix in ws)
    return [w for w, _ in ws]


# Quote variants per transcript: (label, begin, end, substitution position or None).
# Region A chains three spans overlapping by 5 tokens, region B has an exact and
# a one-word variant of the same span, region C has two spans sharing 4 tokens.
variants = {}
for tr in transcripts:
    (sa, wa), (sb, wb), (sc, wc) = tr["speech"][0], tr["speech"][2], tr["speech"][4]
    a0 = sa + 6
    b0 = sb + 10
    c0 = sc + 8
    variants[tr["id"]] = [
        ("A1", a0, a0 + 12, None),
        ("A2", a0 + 7, a0 + 19, None),
        ("A3", a0 + 14, a0 + 26, None),
        ("B1", b0, b0 + 14, None),
        ("B2", b0, b0 + 14, 6),
        ("C1", c0, c0 + 10, None),
        ("C2", c0 + 6, c0 + 16, None),
    ]


def quote_text(tr, v):
    _, b, e, sub = v
    ws = span_words(tr, b, e)
    if sub is not None:
        ws = ws[:sub] + [rng.choice(JUNK)] + ws[sub + 1:]
    return " ".join(ws)


# ---------------------------------------------------------------- outlets

labels = ["dC"] * 3 + ["sC"] * 3 + ["sL"] * 3 + ["dL"] * 3 + ["unlabeled"] * 2
outlets = [{"id": "o%02d" % (k + 1), "domain": "news%02d.example.com" % (k + 1), "label": l}
           for k, l in enumerate(labels)]
label_of = {o["id"]: o["label"] for o in outlets}

# ---------------------------------------------------------------- articles

articles = []
# Ground truth per article: list of (transcript id, begin, end) that must match.
truth = {}


def filler(n):
    return sentence_text([rng.choice(FILLER) for _ in range(n)])


def add_article(outlet, when, quotes, mention=True, extra=""):
    aid = "a%03d" % (len(articles) + 1)
    parts = [filler(rng.randint(10, 16))]
    for text in quotes:
        if rng.random() < 0.5:
            parts.append("Obama said “%s”" % text.capitalize() if mention else "He said “%s”" % text.capitalize())
        else:
            parts.append("Obama said \"%s\"" % text.capitalize() if mention else "He said \"%s\"" % text.capitalize())
        parts.append(filler(rng.randint(8, 14)))
    if extra:
        parts.append(extra)
    body = " ".join(parts)
    title = (("Obama " if mention else "") + filler(4)).strip()
    articles.append({"id": aid, "outlet_id": outlet, "timestamp": iso(when), "title": title,
                     "url": "https://%s/%s" % (outlet, aid), "body": body, "_when": when})
    return aid


outlet_ids = [o["id"] for o in outlets]
for tr in transcripts:
    vs = variants[tr["id"]]
    for k in range(30):
        outlet = rng.choice(outlet_ids)
        when = tr["when"] + timedelta(hours=rng.randint(1, 150), minutes=rng.randint(0, 59))
        picked = rng.sample(vs, rng.choice([1, 1, 2]))
        texts = [quote_text(tr, v) for v in picked]
        extra = ""
        if rng.random() < 0.3:
            extra = "A spokesman added “%s”" % " ".join(rng.choice(JUNK) for _ in range(rng.randint(7, 10)))
        elif rng.random() < 0.3:
            extra = "“We will see,” he said."
        aid = add_article(outlet, when, texts, extra=extra)
        truth[aid] = [(tr["id"], v[1], v[2]) for v in picked]

# Articles without the keyword: kept for mention fractions, filtered before matching.
for k in range(16):
    tr = rng.choice(transcripts)
    v = rng.choice(variants[tr["id"]])
    when = tr["when"] + timedelta(hours=rng.randint(1, 100))
    add_article(rng.choice(outlet_ids), when, [quote_text(tr, v)], mention=False)

# Quotes published too late to be searched against their speech.
for k in range(4):
    tr = transcripts[k]
    v = variants[tr["id"]][3]
    when = tr["when"] + timedelta(days=8, hours=rng.randint(1, 20))
    aid = add_article(rng.choice(outlet_ids), when, [quote_text(tr, v)])
    truth[aid] = []

# A reporter's question is not presidential speech.
for k in range(3):
    tr = transcripts[k]
    qb, qw = tr["question"]
    when = tr["when"] + timedelta(hours=5 + k)
    aid = add_article(rng.choice(outlet_ids), when, [" ".join(qw[:10])])
    truth[aid] = []


def perturb(body, fraction, protect):
    """Replaces letters outside protected quote spans."""
    chars = list(body)
    allowed = [i for i, c in enumerate(chars) if c.isalpha() and c.islower() and not any(b <= i < e for b, e in protect)]
    for i in rng.sample(allowed, int(round(fraction * len(chars)))):
        chars[i] = rng.choice([c for c in "bdfgklmprstvz" if c != chars[i]])
    return "".join(chars)


def quote_ranges(body):
    out, start = [], None
    for i, c in enumerate(body):
        if c in "“\"" and start is None:
            start = i
        elif c in "”\"" and start is not None:
            out.append((start, i + 1))
            start = None
    return out


def copy_article(src, outlet, hours, fraction):
    body = src["body"] if fraction == 0 else perturb(src["body"], fraction, quote_ranges(src["body"]))
    aid = "a%03d" % (len(articles) + 1)
    when = src["_when"] + timedelta(hours=hours)
    articles.append({"id": aid, "outlet_id": outlet, "timestamp": iso(when), "title": src["title"],
                     "url": "https://%s/%s" % (outlet, aid), "body": body, "_when": when})
    truth[aid] = list(truth[src["id"]])
    return articles[-1]


planted_drops = []  # (dropped, surviving original)
planted_links = []  # (copy, article it was copied from)
matched_sources = [a for a in articles if truth.get(a["id"])]
wire_sources = rng.sample(matched_sources, 12)


def distance(a, b):
    return levenshtein(a["body"], b["body"]) / max(len(a["body"]), len(b["body"]))


for k, src in enumerate(wire_sources):
    others = [o for o in outlet_ids if o != src["outlet_id"]]
    if k < 6:
        c = copy_article(src, rng.choice(others), rng.randint(1, 20), 0.0)
    elif k < 10:
        c = copy_article(src, rng.choice(others), rng.randint(1, 20), 0.06)
    else:
        b = copy_article(src, rng.choice(others), rng.randint(1, 10), 0.13)
        planted_drops.append((b["id"], src["id"]))
        planted_links.append((b, src))
        c = copy_article(b, rng.choice(others), rng.randint(1, 10), 0.13)
        assert distance(src, c) > 0.2, distance(src, c)
        planted_drops.append((c["id"], src["id"]))
        planted_links.append((c, b))
        continue
    planted_drops.append((c["id"], src["id"]))
    planted_links.append((c, src))

for copy, parent in planted_links:
    assert distance(copy, parent) <= 0.2, distance(copy, parent)

# A near copy outside the comparison window is kept.
late_src = matched_sources[0]
late = copy_article(late_src, outlet_ids[-1], 24 * 20, 0.0)
truth[late["id"]] = []

# ---------------------------------------------------------------- expectations

dropped_ids = {d for d, _ in planted_drops}
tr_by_id = {t["id"]: t for t in transcripts}

# Matched spans of kept, keyword-bearing articles.
spans_by_tr = {}
citations = []  # (outlet, transcript, begin, end, when)
for a in articles:
    if a["id"] in dropped_ids or a["id"] not in truth:
        continue
    for tid, b, e in truth[a["id"]]:
        spans_by_tr.setdefault(tid, set()).add((b, e))
        citations.append((a["outlet_id"], tid, b, e, a["_when"]))

clusters = {}  # (tid, b, e) -> cluster key
cluster_list = []
for tid, spans in sorted(spans_by_tr.items()):
    spans = sorted(spans)
    parent = list(range(len(spans)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            ov = min(spans[i][1], spans[j][1]) - max(spans[i][0], spans[j][0])
            if ov >= 5:
                parent[find(i)] = find(j)
    groups = {}
    for i, s in enumerate(spans):
        groups.setdefault(find(i), []).append(s)
    for members in groups.values():
        b = min(s[0] for s in members)
        e = max(s[1] for s in members)
        cid = "%s:%d-%d" % (tid, b, e)
        cluster_list.append({"cluster_id": cid, "transcript_id": tid, "span_start": b, "span_end": e})
        for s in members:
            clusters[(tid,) + s] = (cid, b, e)
cluster_list.sort(key=lambda c: (c["transcript_id"], c["span_start"], c["span_end"]))

first_cite = {}
for outlet, tid, b, e, when in citations:
    cid = clusters[(tid, b, e)][0]
    key = (outlet, cid)
    if key not in first_cite or when < first_cite[key]:
        first_cite[key] = when
edges = [{"outlet_id": o, "cluster_id": c, "timestamp": iso(w)} for (o, c), w in sorted(first_cite.items())]

span_of = {c["cluster_id"]: (c["transcript_id"], c["span_start"], c["span_end"]) for c in cluster_list}
tracks = []
for tr in transcripts:
    n = len(tr["tokens"])
    overall = [0] * n
    by_cat = {l: [0] * n for l in ["dC", "dL", "sC", "sL"]}
    for e in edges:
        tid, b, en = span_of[e["cluster_id"]]
        if tid != tr["id"]:
            continue
        cat = label_of[e["outlet_id"]]
        for k in range(b, en):
            overall[k] += 1
            if cat in by_cat:
                by_cat[cat][k] += 1
    tracks.append({"transcript_id": tr["id"], "tokens": n, "overall": overall, "by_category": by_cat})

expected = {
    "transcripts": len(transcripts),
    "articles": len(articles),
    "outlets": len(outlets),
    "keyword_articles": sum(1 for a in articles if "Obama" in a["body"] or "Obama" in a["title"]),
    "dropped": [{"dropped_id": d, "kept_id": k} for d, k in sorted(planted_drops)],
    "clusters": cluster_list,
    "edges": edges,
    "tracks": tracks,
}

# ---------------------------------------------------------------- write

os.makedirs(OUT, exist_ok=True)


def dump_jsonl(name, rows):
    with open(os.path.join(OUT, name), "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


dump_jsonl("outlets.jsonl", outlets)
dump_jsonl("transcripts.jsonl", [{"id": t["id"], "timestamp": iso(t["when"]), "segments": t["segments"]}
                                 for t in transcripts])
rng.shuffle(articles)
dump_jsonl("articles.jsonl", [{k: v for k, v in a.items() if not k.startswith("_")} for a in articles])
with open(os.path.join(OUT, "expected.json"), "w", encoding="utf-8") as f:
    json.dump(expected, f, indent=1)
    f.write("\n")

config = {
    "seed": 11,
    "paths": {"transcripts": "transcripts.jsonl", "articles": "articles.jsonl", "outlets": "outlets.jsonl",
              "workdir": "work"},
    "corpus": {"speaker": "OBAMA", "keyword": "Obama"},
    "describe": {"keyword": "Obama", "min_citers": 5},
    "ensemble": {"num_graphs": 100},
    "holdout": {"count": 60},
    "completion": {"lambda_count": 8, "max_rank": 10, "max_iters": 300, "tol": 1e-8},
    "latent": {"rank": 3, "top_k": 3},
    "report": {"title": "Mini corpus"},
}
with open(os.path.join(OUT, "config.json"), "w", encoding="utf-8") as f:
    json.dump(config, f, indent=2)
    f.write("\n")

print("articles", len(articles), "clusters", len(cluster_list), "edges", len(edges), "drops", len(planted_drops))
