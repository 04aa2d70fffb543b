"""Time the numpy and compiled conv/pool kernels side by side.

    python benchmarks/bench_kernels.py [--batch 64] [--repeat 5]

Shapes are those of the full-size network: conv1 on (B,30,30,1), conv2 on
(B,30,30,32) and the 2x2 pool on (B,30,30,64). The last block times one
forward+backward pass of the whole model on a batch.
"""
import argparse
import timeit

import numpy as np

from barchart_trader.neuralnet import ModelConfig, backward, forward, init_model, kernels


def cases(batch, rng):
    x1 = rng.random((batch, 30, 30, 1))
    x2 = rng.random((batch, 30, 30, 32))
    x3 = rng.normal(size=(batch, 30, 30, 64))
    d2 = rng.normal(size=(batch * 900, 9 * 32))
    pooled, arg = kernels.BACKENDS["python"].maxpool2x2(x3)
    g = rng.normal(size=pooled.shape)
    model = init_model(ModelConfig(seed=0))
    images = (rng.random((batch, 30, 30, 1)) < 0.5).astype(np.float64)
    labels = rng.integers(0, 3, batch)

    def train_step():
        fwd = forward(model, images, training=True, rng=np.random.default_rng(0))
        backward(model, fwd, labels)

    return {
        "im2col conv1": lambda: kernels.im2col3x3(x1),
        "im2col conv2": lambda: kernels.im2col3x3(x2),
        "col2im conv2": lambda: kernels.col2im3x3(d2, batch, 30, 30, 32),
        "maxpool": lambda: kernels.maxpool2x2(x3),
        "maxpool backward": lambda: kernels.maxpool2x2_backward(g, arg),
        "forward+backward": train_step,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    names = sorted(kernels.BACKENDS)
    results = {}
    for name in names:
        kernels.use_backend(name)
        for label, fn in cases(args.batch, np.random.default_rng(0)).items():
            fn()  # warm up
            results[label, name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))

    print(f"batch {args.batch}, best of {args.repeat}, milliseconds")
    print(f"{'kernel':<18}" + "".join(f"{n:>10}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label in cases(1, np.random.default_rng(0)):
        row = f"{label:<18}" + "".join(f"{results[label, n] * 1e3:10.2f}" for n in names)
        if len(names) > 1:
            row += f"{results[label, 'python'] / results[label, 'cython']:9.1f}x"
        print(row)
    if len(names) == 1:
        print("compiled kernels not built; only the numpy backend was timed")


if __name__ == "__main__":
    main()
