"""Random trigonometric polynomials with analytically known derivatives and values."""

import numpy as np


class TrigPoly:
    """f(x) = a0 + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x), k = 1..degree."""

    def __init__(self, rng, degree, decay=0.0):
        k = np.arange(1, degree + 1)
        scale = 1.0 / (1.0 + k) ** decay
        self.k = k
        self.a0 = rng.standard_normal()
        self.a = rng.standard_normal(degree) * scale
        self.b = rng.standard_normal(degree) * scale

    def __call__(self, x, order=0):
        x = np.asarray(x, dtype=float)[..., None]
        w = 2 * np.pi * self.k
        # d^m/dx^m cos(wx) = w^m cos(wx + m pi/2), same for sin
        phase = order * np.pi / 2
        out = (w**order * (self.a * np.cos(w * x + phase) + self.b * np.sin(w * x + phase))).sum(axis=-1)
        return out + (self.a0 if order == 0 else 0.0)


def band_limited(rng, n, degree=32, decay=2.0, mean=True):
    p = TrigPoly(rng, degree, decay)
    if not mean:
        p.a0 = 0.0
    return p(np.arange(n) / n)
