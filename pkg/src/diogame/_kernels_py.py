"""Pure-Python twin of the compiled kernels (identical signatures and results)."""

from __future__ import annotations

import math

# relative slack on the float test; survivors are re-checked exactly
MARGIN = 1e-9


def dominator_scan(q: int, p: list[int], r: list[float], c: float) -> list[int]:
    """Denominators q' < q whose nearest numerators fall inside every coordinate window.

    Coordinate i passes when |round(q' p_i / q) * q - q' p_i| <= c * q * q'^(-r_i),
    the necessary condition for a box around p'/q' to contain the box around p/q.
    """
    out = []
    d = len(p)
    cq = c * q * (1.0 + MARGIN)
    half = q // 2
    for qp in range(1, q):
        ok = True
        for i in range(d):
            t = qp * p[i]
            num = (t + half) // q
            diff = abs(num * q - t)
            if diff > cq * math.pow(qp, -r[i]) + 1e-300:
                ok = False
                break
        if ok:
            out.append(qp)
    return out
