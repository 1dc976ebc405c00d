"""Wigner d- and D-matrices for the integer representations of SO(3)."""

from __future__ import annotations

from math import factorial

import numpy as np


def wigner_d(ell: int, beta: float) -> np.ndarray:
    """Small Wigner d^l(beta), indexed d[m' + l, m + l].

    Direct factorial-sum evaluation; adequate and stable for the desk-scale
    bands used here (l <= 16).
    """
    c = np.cos(beta / 2.0)
    s = np.sin(beta / 2.0)
    dim = 2 * ell + 1
    d = np.zeros((dim, dim))
    for mp in range(-ell, ell + 1):
        for m in range(-ell, ell + 1):
            pref = np.sqrt(factorial(ell + mp) * factorial(ell - mp)
                           * factorial(ell + m) * factorial(ell - m))
            s_lo = max(0, m - mp)
            s_hi = min(ell + m, ell - mp)
            acc = 0.0
            for k in range(s_lo, s_hi + 1):
                num = (-1.0) ** (mp - m + k)
                den = (factorial(ell + m - k) * factorial(k)
                       * factorial(mp - m + k) * factorial(ell - mp - k))
                acc += num / den * c ** (2 * ell + m - mp - 2 * k) * s ** (mp - m + 2 * k)
            d[mp + ell, m + ell] = pref * acc
    return d


def wigner_D(ell: int, alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Unitary D^l for the ZYZ rotation Rz(alpha) Ry(beta) Rz(gamma)."""
    m = np.arange(-ell, ell + 1)
    d = wigner_d(ell, beta)
    return (np.exp(-1j * m[:, None] * alpha) * d * np.exp(-1j * m[None, :] * gamma))
