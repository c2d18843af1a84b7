#!/usr/bin/env python3
"""Reference probabilities for the 20-example logistic-regression toy set.

Independent of the C++ code: own tokenizer, scikit-learn's lbfgs solver.
sklearn with C=1 minimises sum_i NLL_i + 0.5 * ||W||^2 with an unpenalised
intercept, the same objective as the C++ trainer with l2 = 1.

Writes tests/support/lr_oracle.inc (frozen; rerun only if the toy set changes).
"""

import re
from pathlib import Path

import numpy as np
from sklearn.feature_extraction import DictVectorizer
from sklearn.linear_model import LogisticRegression

TRAIN = [
    ("great food and friendly staff", "pos"),
    ("the service was great", "pos"),
    ("friendly people and a great view", "pos"),
    ("loved the food loved the view", "pos"),
    ("a great stay with friendly hosts", "pos"),
    ("wonderful room and great breakfast", "pos"),
    ("the staff were wonderful", "pos"),
    ("terrible food and rude staff", "neg"),
    ("the service was terrible", "neg"),
    ("rude people and a dirty room", "neg"),
    ("hated the food hated the noise", "neg"),
    ("a dirty stay with rude hosts", "neg"),
    ("awful room and cold breakfast", "neg"),
    ("the staff were awful", "neg"),
    ("the room was on the second floor", "neu"),
    ("breakfast is served at eight", "neu"),
    ("the hotel has a parking lot", "neu"),
    ("we stayed for two nights", "neu"),
    ("the view faces the street", "neu"),
    ("check in starts at noon", "neu"),
]

QUERIES = [
    "great staff but a dirty room",
    "the food was wonderful",
    "rude and awful",
    "parking is at the back",
    "!!!",
]


def featurize(text):
    toks = re.findall(r"[a-z0-9]+", text.lower())
    f = {}
    for i, t in enumerate(toks):
        f[t] = f.get(t, 0) + 1
        if i + 1 < len(toks):
            b = t + "_" + toks[i + 1]
            f[b] = f.get(b, 0) + 1
    return f


def main():
    vec = DictVectorizer(sparse=False)
    X = vec.fit_transform([featurize(t) for t, _ in TRAIN])
    y = [c for _, c in TRAIN]
    clf = LogisticRegression(C=1.0, solver="lbfgs", tol=1e-12, max_iter=100000)
    clf.fit(X, y)
    texts = [t for t, _ in TRAIN] + QUERIES
    P = clf.predict_proba(vec.transform([featurize(t) for t in texts]))
    assert list(clf.classes_) == ["neg", "neu", "pos"]
    out = Path(__file__).resolve().parent.parent / "support" / "lr_oracle.inc"
    labels = y + [""] * len(QUERIES)
    lines = ["// generated by tests/oracles/lr_reference.py: text, training label, p(neg), p(neu), p(pos)"]
    for t, lab, p in zip(texts, labels, P):
        lines.append('{"%s", "%s", {%s}},' % (t, lab, ", ".join("%.6f" % v for v in p)))
    out.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))


if __name__ == "__main__":
    main()
