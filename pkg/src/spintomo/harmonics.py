"""Spherical harmonics via the stable normalized associated-Legendre recurrence.

Condon-Shortley phase convention: Y_{1,1} = -sqrt(3/8pi) sin(theta) e^{i phi}.
Negative orders follow from Y_{l,-m} = (-1)^m conj(Y_{lm}).
"""

from __future__ import annotations

import math

import numpy as np


def _legendre_normalized(l: int, m: int, x: np.ndarray, sx: np.ndarray) -> np.ndarray:
    """Fully normalized P_l^m(x) with x = cos(theta), sx = sin(theta), m >= 0.

    Normalized so that Y_lm(theta, phi) = P_l^m(cos theta) * exp(i m phi).
    Upward recurrence in degree; stable for the moderate l used here.
    """
    pmm = np.full_like(x, math.sqrt(1.0 / (4 * math.pi)))
    for i in range(1, m + 1):
        pmm = -math.sqrt((2 * i + 1) / (2 * i)) * sx * pmm
    if l == m:
        return pmm
    pm1 = math.sqrt(2 * m + 3) * x * pmm
    if l == m + 1:
        return pm1
    for ll in range(m + 2, l + 1):
        a = math.sqrt((4 * ll * ll - 1) / (ll * ll - m * m))
        b = math.sqrt(((ll - 1) ** 2 - m * m) / (4 * (ll - 1) ** 2 - 1))
        pmm, pm1 = pm1, a * (x * pm1 - b * pmm)
    return pm1


def ylm(l: int, m: int, theta, phi) -> complex | np.ndarray:
    """Spherical harmonic Y_lm(theta, phi); broadcasts over array angles."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"require 0 <= |m| <= l, got l={l}, m={m}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ma = abs(m)
    p = _legendre_normalized(l, ma, np.cos(theta), np.sin(theta))
    y = p * np.exp(1j * ma * phi)
    if m < 0:
        y = (-1) ** ma * y.conj()
    return y if y.shape else complex(y)
