"""Benchmark the compiled kernels against the pure-Python twins.

Synthesizes a corpus at roughly the scale of a real moderation dataset,
then times token span scanning and logistic-regression training on each
available implementation, verifying the outputs match bit for bit.

    python benchmarks/bench_kernels.py --comments 20000 --epochs 30
"""

import argparse
import random
import time
from array import array

from condel._native import available_impls


def synth_texts(n: int, seed: int = 0) -> list[str]:
    rng = random.Random(seed)
    vocab = [f"word{i}" for i in range(2000)]
    punct = [".", ",", "!", "?", "...", ";"]
    texts = []
    for _ in range(n):
        words = []
        for _ in range(rng.randint(5, 60)):
            words.append(rng.choice(vocab))
            if rng.random() < 0.15:
                words[-1] += rng.choice(punct)
        texts.append(" ".join(words))
    return texts


def synth_csr(n_rows: int, n_feat: int, seed: int = 1):
    rng = random.Random(seed)
    indptr = array("q", [0])
    indices = array("q")
    counts = array("d")
    labels = array("d")
    for _ in range(n_rows):
        for j in sorted(rng.sample(range(n_feat), rng.randint(3, 25))):
            indices.append(j)
            counts.append(float(rng.randint(1, 3)))
        indptr.append(len(indices))
        labels.append(float(rng.randint(0, 1)))
    return indptr, indices, counts, labels


def timed(fn, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--comments", type=int, default=20000)
    parser.add_argument("--features", type=int, default=5000)
    parser.add_argument("--epochs", type=int, default=30)
    args = parser.parse_args()

    impls = available_impls()
    if len(impls) < 2:
        print("compiled extension not built; benchmarking pure only")

    texts = synth_texts(args.comments)
    indptr, indices, counts, labels = synth_csr(args.comments, args.features)

    results: dict[str, dict[str, float]] = {}
    outputs: dict[str, tuple] = {}
    for impl in impls:
        tok_time = timed(lambda: [impl.tokenize_spans(t) for t in texts])

        def train():
            w = array("d", bytes(8 * args.features))
            bias = impl.logistic_train(
                indptr, indices, counts, labels, w, 0.0, 1e-4, 0.5, args.epochs
            )
            return w, bias

        train_time = timed(train, repeats=1)
        results[impl.IMPL] = {"tokenize": tok_time, "train": train_time}
        outputs[impl.IMPL] = (
            [impl.tokenize_spans(t) for t in texts[:100]],
            train(),
        )

    if len(impls) == 2:
        tok_a, train_a = outputs["pure"]
        tok_b, train_b = outputs["compiled"]
        assert tok_a == tok_b, "tokenize outputs diverge"
        assert list(train_a[0]) == list(train_b[0]), "trained weights diverge"
        assert train_a[1] == train_b[1], "trained bias diverges"

    print(f"\n{args.comments} comments, {args.features} features, "
          f"{args.epochs} epochs\n")
    print(f"{'kernel':<10} {'tokenize':>12} {'train':>12}")
    for name, row in results.items():
        print(f"{name:<10} {row['tokenize']:>11.3f}s {row['train']:>11.3f}s")
    if len(results) == 2:
        pure, compiled = results["pure"], results["compiled"]
        print(
            f"{'speedup':<10} "
            f"{pure['tokenize'] / compiled['tokenize']:>10.1f}x "
            f"{pure['train'] / compiled['train']:>11.1f}x"
        )
        print("\noutputs bit-identical across implementations")


if __name__ == "__main__":
    main()
