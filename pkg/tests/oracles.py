"""Deliberately naive reference implementations used as test oracles.

Nothing here imports the code under test beyond plain data types.
"""
import math

import numpy as np


def conv2d_loops(x, kernels, biases):
    """Same-padded 3x3 cross-correlation with explicit loops. x: (H, W, Cin)."""
    h, w, cin = x.shape
    cout = kernels.shape[3]
    out = np.zeros((h, w, cout))
    for i in range(h):
        for j in range(w):
            for o in range(cout):
                acc = biases[o]
                for di in range(3):
                    for dj in range(3):
                        si, sj = i + di - 1, j + dj - 1
                        if 0 <= si < h and 0 <= sj < w:
                            for c in range(cin):
                                acc += x[si, sj, c] * kernels[di, dj, c, o]
                out[i, j, o] = acc
    return out


def maxpool_loops(x):
    h, w, c = x.shape
    out = np.zeros((h // 2, w // 2, c))
    arg = np.zeros((h // 2, w // 2, c), dtype=int)
    for i in range(h // 2):
        for j in range(w // 2):
            for ch in range(c):
                vals = [x[2 * i, 2 * j, ch], x[2 * i, 2 * j + 1, ch],
                        x[2 * i + 1, 2 * j, ch], x[2 * i + 1, 2 * j + 1, ch]]
                best = max(vals)
                out[i, j, ch] = best
                arg[i, j, ch] = vals.index(best)
    return out, arg


def dense_loops(x, weights, biases):
    return np.array([sum(weights[i, j] * x[j] for j in range(len(x))) + biases[i]
                     for i in range(len(biases))])


def scenario_interpreter(prices, labels, start=10_000.0, commission=1.0, liquidate=True):
    """Straight transcription of the Buy/Hold/Sell scenario.

    Returns (final money, list of (buy_day, sell_day, gain), daily equity).
    Labels: 0 hold, 1 buy, 2 sell.
    """
    money, stocks = start, 0.0
    last_label = None
    trades = []
    equity = []
    opened = None
    for day, (price, label) in enumerate(zip(prices, labels)):
        repeated = label == last_label
        last_label = label
        if not repeated:
            if label == 1 and stocks == 0.0 and opened is None:
                opened = (day, money)
                stocks = (money - commission) / price
                money = 0.0
            elif label == 2 and opened is not None:
                money = price * stocks - commission
                trades.append((opened[0], day, money - opened[1]))
                stocks = 0.0
                opened = None
        equity.append(money if opened is None else stocks * price)
    if opened is not None and liquidate:
        money = prices[-1] * stocks - commission
        trades.append((opened[0], len(prices) - 1, money - opened[1]))
        equity[-1] = money
        opened = None
    final = money if opened is None else equity[-1]
    return final, trades, equity


def brute_force_labels(prices, first_fraction=0.4, second_fraction=0.6):
    """Label every window with lookahead straight from the raw price list."""
    n = len(prices)
    ends = range(29, n - 15)
    ref = sorted((prices[e + 4] - prices[e]) / 4 for e in ends)
    lo = ref[int(math.floor(first_fraction * len(ref) + 1e-9))]
    hi = ref[int(math.floor(second_fraction * len(ref) + 1e-9))]
    labels = []
    for e in ends:
        s = (prices[e + 15] - prices[e]) / 15
        labels.append(1 if s > hi else 2 if s < lo else 0)
    return labels


def central_difference(f, x, step=1e-4):
    """Central finite-difference gradient of scalar f at array x (in place)."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + step
        up = f()
        x[idx] = orig - step
        down = f()
        x[idx] = orig
        grad[idx] = (up - down) / (2 * step)
    return grad
