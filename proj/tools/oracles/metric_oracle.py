#!/usr/bin/env python3
# Copyright 2026 The Docforge Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Brute-force d-BLEU and ROUGE oracle checked against `docforge evaluate`.

Builds a tiny synthetic test set, perturbs its references into hypotheses,
scores them with the CLI and compares every reported number with a direct
recomputation from the definitions.
"""

import argparse
import json
import math
import random
import subprocess
import sys
from pathlib import Path

TOL = 1e-4


def ngrams(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def clipped(hyp_grams, ref_grams):
    total = 0
    for g in set(hyp_grams):
        total += min(hyp_grams.count(g), ref_grams.count(g))
    return total


def bleu(hyps, refs):
    matches = [0] * 4
    possible = [0] * 4
    hyp_len = sum(len(h) for h in hyps)
    ref_len = sum(len(r) for r in refs)
    for h, r in zip(hyps, refs):
        for n in range(1, 5):
            hg, rg = ngrams(h, n), ngrams(r, n)
            matches[n - 1] += clipped(hg, rg)
            possible[n - 1] += len(hg)
    precisions = [m / p if p and m else 0.0 for m, p in zip(matches, possible)]
    if hyp_len == 0:
        bp = 0.0
    elif hyp_len < ref_len:
        bp = math.exp(1 - ref_len / hyp_len)
    else:
        bp = 1.0
    if min(precisions) == 0.0:
        return 0.0, precisions, bp
    return 100 * bp * math.exp(sum(math.log(p) for p in precisions) / 4), precisions, bp


def lcs(a, b):
    memo = {}

    def go(i, j):
        if i == len(a) or j == len(b):
            return 0
        if (i, j) not in memo:
            if a[i] == b[j]:
                memo[(i, j)] = 1 + go(i + 1, j + 1)
            else:
                memo[(i, j)] = max(go(i + 1, j), go(i, j + 1))
        return memo[(i, j)]

    return go(0, 0)


def f1(p, r):
    return 2 * p * r / (p + r) if p + r else 0.0


def rouge_one(hyp, ref, variant):
    if not hyp:
        return 0.0, 0.0, 0.0
    if variant == "ROUGE-L":
        overlap, ht, rt = lcs(hyp, ref), len(hyp), len(ref)
    else:
        n = 1 if variant == "ROUGE-1" else 2
        hg, rg = ngrams(hyp, n), ngrams(ref, n)
        if not hg or not rg:
            s = 1.0 if hyp == ref else 0.0
            return s, s, s
        overlap, ht, rt = clipped(hg, rg), len(hg), len(rg)
    p, r = overlap / ht, overlap / rt
    return p, r, f1(p, r)


def rouge(hyps, refs, variant):
    rows = [rouge_one(h, r, variant) for h, r in zip(hyps, refs)]
    n = len(rows)
    p = sum(x[0] for x in rows) / n
    r = sum(x[1] for x in rows) / n
    f = sum(x[2] for x in rows) / n
    return 100 * f, p, r, f


def perturb(words, rng):
    out = []
    for w in words:
        roll = rng.random()
        if roll < 0.1:
            continue
        if roll < 0.2:
            out.append(rng.choice(words))
        elif roll < 0.25:
            out.extend([w, w])
        else:
            out.append(w)
    return out or words[:1]


def perturb_doc(sentences, rng):
    out = []
    for s in sentences:
        words = perturb(s.split(), rng)
        if words[-1] != ".":
            words.append(".")
        out.append(" ".join(words))
    if len(out) > 2 and rng.random() < 0.3:
        i = rng.randrange(len(out) - 1)
        out[i], out[i + 1] = out[i + 1], out[i]
    return out


def read_report(path):
    lines = Path(path).read_text().splitlines()
    header = lines[0].split("\t")
    return {row.split("\t")[0]: dict(zip(header, row.split("\t"))) for row in lines[1:]}


def close(name, got, want, failures):
    if abs(float(got) - want) > TOL:
        failures.append(f"{name}: report {got}, oracle {want:.6f}")


def run(docforge, config, *sets):
    cmd = [docforge] + list(sets[:1]) + ["--config", str(config)]
    for s in sets[1:]:
        cmd += ["--set", s]
    subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--docforge", required=True)
    ap.add_argument("--workdir", required=True)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    failures = []
    score, _, _ = bleu([["a", "b", "c", "d"]], [["a", "b", "c", "d", "e"]])
    close("hand d-BLEU", score, 100 * math.exp(-0.25), failures)
    if abs(score - 77.88) >= 0.01:
        failures.append(f"hand d-BLEU {score}")
    if abs(rouge_one(["a", "c"], ["a", "b", "c"], "ROUGE-L")[2] * 100 - 80.0) >= 0.1:
        failures.append("hand ROUGE-L")

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    config = work / "oracle.conf"
    config.write_text(
        "seed = 11\n"
        f'paths.data = "{work / "data"}"\n'
        f'paths.run = "{work / "run"}"\n'
        "synth.train_docs = 20\n"
        "synth.test_docs = 30\n")
    (work / "run").mkdir(exist_ok=True)
    run(args.docforge, config, "build-corpus")

    pairs = [json.loads(line) for line in (work / "data" / "test.jsonl").read_text().splitlines()]
    rng = random.Random(args.seed)
    hyps = []
    for p in pairs:
        tgt = p["tgt"]
        hyps.append({"doc_id": tgt["doc_id"], "lang": tgt["lang"],
                     "sentences": perturb_doc(tgt["sentences"], rng)})
    (work / "hyp.jsonl").write_text("".join(json.dumps(h) + "\n" for h in hyps))

    run(args.docforge, config, "evaluate", f"eval.hyp={work / 'hyp.jsonl'}",
        "eval.output=bleu.tsv")
    got = read_report(work / "run" / "bleu.tsv")["d-BLEU"]
    h_tok = [" ".join(h["sentences"]).split() for h in hyps]
    r_tok = [" ".join(p["tgt"]["sentences"]).split() for p in pairs]
    score, precisions, bp = bleu(h_tok, r_tok)
    close("d-BLEU", got["score"], score, failures)
    for n in range(4):
        close(f"p{n + 1}", got[f"p{n + 1}"], precisions[n], failures)
    close("bp", got["bp"], bp, failures)
    print(f"d-BLEU report {got['score']} oracle {score:.4f}")

    summaries = []
    for p in pairs:
        tgt = p["tgt"]
        summaries.append({"doc_id": tgt["doc_id"], "lang": tgt["lang"],
                          "sentences": perturb_doc(tgt["sentences"][:1], rng)})
    (work / "summ.jsonl").write_text("".join(json.dumps(h) + "\n" for h in summaries))
    run(args.docforge, config, "evaluate", f"eval.hyp={work / 'summ.jsonl'}",
        "eval.task=summarize", "eval.output=rouge.tsv")
    got = read_report(work / "run" / "rouge.tsv")
    h_tok = [" ".join(h["sentences"]).split() for h in summaries]
    r_tok = [p["tgt"]["sentences"][0].split() for p in pairs]
    for variant in ("ROUGE-1", "ROUGE-2", "ROUGE-L"):
        score, prec, rec, f = rouge(h_tok, r_tok, variant)
        row = got[variant]
        close(variant, row["score"], score, failures)
        close(variant + " precision", row["precision"], prec, failures)
        close(variant + " recall", row["recall"], rec, failures)
        close(variant + " f1", row["f1"], f, failures)
        print(f"{variant} report {row['score']} oracle {score:.4f}")

    for f in failures:
        print("MISMATCH", f)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
