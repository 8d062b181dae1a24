"""Rationale-producing classifiers and model-level analysis utilities.

The reference classifier is a bag-of-tokens logistic regression whose
rationale is the set of token occurrences with weight at or above a
cutoff ``rho``.  It preserves the prediction-plus-rationale contract of
heavier architectures while staying runnable at desk scale; predictions
from an external model can be merged instead via ``import_predictions``.

Label boundary: a probability exactly equal to the threshold counts as
toxic.
"""

from __future__ import annotations

import json
import math
import random
from array import array
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol

from . import _native
from .corpus import (
    Comment,
    Corpus,
    Label,
    Prediction,
    TokenSpan,
    tokenize,
)
from .errors import CorpusFormatError, MissingLabelError, TrainingError


class RationaleClassifier(Protocol):
    threshold: float

    def predict(self, text: str) -> Prediction: ...


def _sigmoid(z: float) -> float:
    # Mirrors the kernels: exp overflow saturates to probability 0.
    try:
        return 1.0 / (1.0 + math.exp(-z))
    except OverflowError:
        return 0.0


@dataclass(frozen=True)
class LinearRationaleModel:
    """Logistic regression over token counts with weight-cutoff rationales."""

    weights: dict[str, float]
    bias: float
    threshold: float = 0.5
    rho: float = 1.0  # minimum positive weight for a token to enter the rationale

    def decision_value(self, text: str) -> float:
        z = self.bias
        for token, _ in tokenize(text):
            z += self.weights.get(token, 0.0)
        return z

    def predict(self, text: str) -> Prediction:
        z = self.bias
        spans = []
        for token, span in tokenize(text):
            w = self.weights.get(token, 0.0)
            z += w
            if w >= self.rho:
                spans.append(span)
        prob = _sigmoid(z)
        label = Label.TOXIC if prob >= self.threshold else Label.NONTOXIC
        return Prediction(label=label, prob=prob, rationale=tuple(spans))


@dataclass(frozen=True)
class TrainConfig:
    l1_penalty: float = 1e-4
    epochs: int = 300
    learning_rate: float = 0.5
    seed: int = 0
    threshold: float = 0.5
    # Cap on mean rationale sparsity of predicted-nontoxic training
    # comments used when picking the default rho.
    sparsity_cap: float = 0.05

    def __post_init__(self):
        if self.l1_penalty < 0:
            raise TrainingError("l1_penalty must be >= 0")
        if self.epochs < 1:
            raise TrainingError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise TrainingError("learning_rate must be > 0")


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float | None  # absent when no positives are predicted
    recall: float


def _corpus_csr(corpus: Corpus, vocab: dict[str, int]):
    """CSR token-count matrix plus 0/1 labels, in corpus order."""
    indptr = array("q", [0])
    indices = array("q")
    counts = array("d")
    labels = array("d")
    for c in corpus.comments:
        bag = Counter(token for token, _ in tokenize(c.text))
        for token in sorted(bag):
            j = vocab.get(token)
            if j is not None:
                indices.append(j)
                counts.append(float(bag[token]))
        indptr.append(len(indices))
        labels.append(1.0 if c.gold is Label.TOXIC else 0.0)
    return indptr, indices, counts, labels


def loss_and_gradient(
    corpus: Corpus,
    vocab: dict[str, int],
    weights,
    bias: float,
    l1_penalty: float,
):
    """L1-penalized mean cross-entropy and its (sub)gradient.

    Exposed so the training gradient can be checked against finite
    differences; the same kernel drives the training loop.
    """
    indptr, indices, counts, labels = _corpus_csr(corpus, vocab)
    w = array("d", weights)
    return _native.logistic_loss_grad(
        indptr, indices, counts, labels, w, bias, l1_penalty
    )


def build_vocab(corpus: Corpus) -> dict[str, int]:
    tokens = set()
    for c in corpus.comments:
        tokens.update(token for token, _ in tokenize(c.text))
    return {token: j for j, token in enumerate(sorted(tokens))}


def train_linear(corpus: Corpus, config: TrainConfig = TrainConfig()) -> LinearRationaleModel:
    """Fit the linear model by full-batch gradient descent.

    Deterministic given the seed (used only for the tiny weight
    initialization).  The rationale cutoff rho defaults to the smallest
    positive weight that keeps mean rationale sparsity on
    predicted-nontoxic training comments within config.sparsity_cap.
    """
    if len(corpus) == 0:
        raise TrainingError("empty corpus")
    gold = set()
    for c in corpus.comments:
        if c.gold is None:
            raise MissingLabelError(f"comment {c.id!r} has no gold label")
        gold.add(c.gold)
    if len(gold) < 2:
        raise TrainingError("single-class corpus")

    vocab = build_vocab(corpus)
    rng = random.Random(config.seed)
    w = array("d", (rng.gauss(0.0, 0.01) for _ in range(len(vocab))))
    indptr, indices, counts, labels = _corpus_csr(corpus, vocab)
    bias = _native.logistic_train(
        indptr,
        indices,
        counts,
        labels,
        w,
        0.0,
        config.l1_penalty,
        config.learning_rate,
        config.epochs,
    )
    weights = {token: w[j] for token, j in vocab.items()}
    model = LinearRationaleModel(
        weights=weights, bias=bias, threshold=config.threshold, rho=1.0
    )
    rho = _pick_rho(model, corpus, config.sparsity_cap)
    return replace(model, rho=rho)


def _pick_rho(model: LinearRationaleModel, corpus: Corpus, cap: float) -> float:
    """Smallest positive weight keeping nontoxic-side rationales sparse.

    Mean sparsity over predicted-nontoxic comments is non-increasing in
    rho, so binary search over the distinct positive weights applies.
    If even the largest weight is too frequent, the cutoff moves just
    above it (rationales become empty); with no positive weights the
    cutoff is an arbitrary positive value.
    """
    candidates = sorted({w for w in model.weights.values() if w > 0.0})
    if not candidates:
        return 1.0

    nontoxic_bags = []
    for c in corpus.comments:
        prob = _sigmoid(model.decision_value(c.text))
        if prob >= model.threshold:
            continue
        token_weights = [model.weights.get(t, 0.0) for t, _ in tokenize(c.text)]
        if token_weights:
            nontoxic_bags.append(token_weights)
    if not nontoxic_bags:
        return candidates[0]

    def mean_sparsity(rho: float) -> float:
        total = 0.0
        for tw in nontoxic_bags:
            total += sum(1 for w in tw if w >= rho) / len(tw)
        return total / len(nontoxic_bags)

    lo, hi = 0, len(candidates) - 1
    if mean_sparsity(candidates[hi]) > cap:
        return candidates[hi] + 1.0
    while lo < hi:
        mid = (lo + hi) // 2
        if mean_sparsity(candidates[mid]) <= cap:
            hi = mid
        else:
            lo = mid + 1
    return candidates[lo]


def annotate(model: RationaleClassifier, corpus: Corpus) -> Corpus:
    """Corpus copy where every comment's pred is the model's output."""
    comments = [replace(c, pred=model.predict(c.text)) for c in corpus.comments]
    return corpus.with_comments(comments, threshold=model.threshold)


def import_predictions(corpus: Corpus, path) -> Corpus:
    """Merge externally computed predictions by comment id.

    The file is JSONL of {id, pred, prob?, rationale?}.  Ids missing
    from the corpus are an error; corpus comments missing from the file
    keep whatever prediction they had.
    """
    path = Path(path)
    updates: dict[str, Prediction] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(f"malformed JSON ({e.msg})", lineno) from None
            cid = obj.get("id")
            if cid not in corpus:
                raise CorpusFormatError(f"unknown id {cid}", lineno)
            if obj.get("pred") is None:
                raise CorpusFormatError(f"missing pred for id {cid}", lineno)
            try:
                label = Label.parse(obj["pred"])
            except CorpusFormatError as e:
                raise CorpusFormatError(str(e), lineno) from None
            prob = obj.get("prob")
            if prob is not None:
                prob = float(prob)
                if not (0.0 <= prob <= 1.0):
                    raise CorpusFormatError("prob outside [0,1]", lineno)
            text_len = len(corpus[cid].text)
            spans = []
            for pair in obj.get("rationale") or []:
                try:
                    span = TokenSpan(int(pair[0]), int(pair[1]))
                except Exception:
                    raise CorpusFormatError("bad rationale span", lineno) from None
                if span.end > text_len:
                    raise CorpusFormatError("span out of bounds", lineno)
                spans.append(span)
            updates[cid] = Prediction(label=label, prob=prob, rationale=tuple(spans))
    comments = [
        replace(c, pred=updates.get(c.id, c.pred)) for c in corpus.comments
    ]
    return corpus.with_comments(comments)


def pr_curve(corpus: Corpus, thresholds) -> list[PRPoint]:
    """Precision/recall of the stored probabilities at each threshold.

    Every comment must carry both a gold label and a probability;
    thresholds must be ascending within [0, 1].
    """
    ts = list(thresholds)
    if any(not (0.0 <= t <= 1.0) for t in ts):
        raise ValueError("thresholds must lie in [0,1]")
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise ValueError("thresholds must be ascending")
    pairs = []
    for c in corpus.comments:
        if c.gold is None:
            raise MissingLabelError(f"comment {c.id!r} has no gold label")
        if c.pred is None or c.pred.prob is None:
            raise MissingLabelError(f"comment {c.id!r} has no probability")
        pairs.append((c.pred.prob, c.gold is Label.TOXIC))
    total_toxic = sum(1 for _, toxic in pairs if toxic)
    points = []
    for t in ts:
        positives = [toxic for prob, toxic in pairs if prob >= t]
        tp = sum(positives)
        precision = tp / len(positives) if positives else None
        recall = tp / total_toxic if total_toxic else 0.0
        points.append(PRPoint(threshold=t, precision=precision, recall=recall))
    return points


@dataclass(frozen=True)
class SparsityStats:
    toxic_mean: float | None
    nontoxic_mean: float | None


def rationale_sparsity(corpus: Corpus) -> SparsityStats:
    """Mean fraction of tokens retained in rationales, per predicted class.

    A token counts as retained when its span intersects any rationale
    span.  Comments with no tokens at all are skipped; a class with no
    comments reports an absent mean.
    """
    fractions: dict[Label, list[float]] = {Label.TOXIC: [], Label.NONTOXIC: []}
    for c in corpus.comments:
        if c.pred is None:
            raise MissingLabelError(f"comment {c.id!r} has no prediction")
        toks = tokenize(c.text)
        if not toks:
            continue
        retained = sum(
            1
            for _, span in toks
            if any(span.overlaps(r) for r in c.pred.rationale)
        )
        fractions[c.pred.label].append(retained / len(toks))

    def mean(vals):
        return sum(vals) / len(vals) if vals else None

    return SparsityStats(
        toxic_mean=mean(fractions[Label.TOXIC]),
        nontoxic_mean=mean(fractions[Label.NONTOXIC]),
    )


def save_model(model: LinearRationaleModel, path) -> None:
    payload = {
        "weights": dict(sorted(model.weights.items())),
        "bias": model.bias,
        "threshold": model.threshold,
        "rho": model.rho,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")


def load_model(path) -> LinearRationaleModel:
    obj = json.loads(Path(path).read_text())
    return LinearRationaleModel(
        weights={str(k): float(v) for k, v in obj["weights"].items()},
        bias=float(obj["bias"]),
        threshold=float(obj.get("threshold", 0.5)),
        rho=float(obj.get("rho", 1.0)),
    )
