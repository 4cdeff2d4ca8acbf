import itertools
import math

import numpy as np


def sample_combinations(rng: np.random.Generator, n: int, k: int, size: int) -> np.ndarray:
    """``size`` uniform k-subsets of ``range(n)``, rows sorted, rows in lex order."""
    out = np.empty((size, k), dtype=np.int64)
    for c in range(k):
        v = rng.integers(0, n - c, size=size)
        if c:
            prior = np.sort(out[:, :c], axis=1)
            for col in range(c):
                v = v + (v >= prior[:, col])
        out[:, c] = v
    out.sort(axis=1)
    return lex_sorted(out)


def lex_sorted(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return rows
    return rows[np.lexsort(rows.T[::-1])]


def all_combinations(n: int, k: int) -> np.ndarray:
    total = math.comb(n, k)
    flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(n), k)),
                       dtype=np.int64, count=total * k)
    return flat.reshape(total, k)
