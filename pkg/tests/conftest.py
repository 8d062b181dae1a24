import random
from pathlib import Path

import pytest

from condel.corpus import Comment, Corpus, Label, Prediction, TokenSpan, load_corpus, tokenize
from condel.index import build_index

REPO = Path(__file__).resolve().parent.parent
F1_PATH = REPO / "data" / "f1.jsonl"


@pytest.fixture(scope="session")
def f1() -> Corpus:
    return load_corpus(F1_PATH, name="f1")


@pytest.fixture(scope="session")
def f1_index(f1):
    return build_index(f1)


@pytest.fixture
def f1_path() -> Path:
    return F1_PATH


def synth_corpus(seed: int, max_comments: int = 200, vocab_size: int = 40,
                 with_pred: bool = True, with_gold: bool = True) -> Corpus:
    """Random labeled+annotated corpus, deterministic per seed."""
    rng = random.Random(seed)
    vocab = [f"w{i}" for i in range(rng.randint(5, vocab_size))]
    n = rng.randint(1, max_comments)
    comments = []
    for i in range(n):
        words = [rng.choice(vocab) for _ in range(rng.randint(1, 12))]
        text = " ".join(words)
        gold = None
        if with_gold:
            gold = Label.TOXIC if rng.random() < 0.4 else Label.NONTOXIC
        pred = None
        if with_pred:
            prob = round(rng.random(), 6)
            label = Label.TOXIC if prob >= 0.5 else Label.NONTOXIC
            spans = tuple(
                span for _, span in tokenize(text) if rng.random() < 0.25
            )
            pred = Prediction(label=label, prob=prob, rationale=spans)
        comments.append(Comment(id=f"s{i}", text=text, gold=gold, pred=pred))
    return Corpus(name=f"synth{seed}", comments=tuple(comments))


def synth_keywords(seed: int, corpus: Corpus, max_rules: int = 10) -> list[str]:
    """Random candidate rules; mostly present tokens, a few absent ones."""
    rng = random.Random(seed * 7919 + 13)
    present = sorted({t for c in corpus.comments for t, _ in tokenize(c.text)})
    k = rng.randint(1, max_rules)
    chosen = []
    for _ in range(k):
        if present and rng.random() < 0.85:
            kw = rng.choice(present)
        else:
            kw = f"absent{rng.randint(0, 99)}"
        if kw not in chosen:
            chosen.append(kw)
    return chosen
