"""Vectorised adaptive Simpson quadrature."""

from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["adaptive_simpson", "QuadratureError"]


class QuadratureError(RuntimeError):
    pass


def adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    epsabs: float = 1e-10,
    epsrel: float = 1e-10,
    initial_panels: int = 32,
    max_depth: int = 40,
) -> complex | float:
    """Integrate ``f`` over ``[a, b]`` with adaptive Simpson refinement.

    ``f`` must accept a 1-D array of abscissae and return values of the same
    shape (real or complex). All unconverged panels are refined together, so
    each pass costs a single call to ``f``.

    A panel is accepted once the Richardson error estimate ``|S2 - S1| / 15``
    falls below its share of ``max(epsabs, epsrel * |I|)``, where ``I`` is the
    running estimate of the whole integral.
    """
    if b == a:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    x = np.concatenate([lo, mid, hi])
    fx = np.asarray(f(x))
    n = len(lo)
    flo, fmid, fhi = fx[:n], fx[n : 2 * n], fx[2 * n :]
    whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    total = 0.0
    estimate = abs(np.sum(whole))
    span = b - a
    for _ in range(max_depth):
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        fx = np.asarray(f(np.concatenate([lm, rm])))
        n = len(lo)
        flm, frm = fx[:n], fx[n:]
        h = (hi - lo) / 12.0
        left = h * (flo + 4.0 * flm + fmid)
        right = h * (fmid + 4.0 * frm + fhi)
        err = left + right - whole
        tol = max(epsabs, epsrel * estimate)
        done = np.abs(err) <= 15.0 * tol * (hi - lo) / span
        total = total + np.sum((left + right + err / 15.0)[done])
        if done.all():
            return sign * total
        keep = ~done
        lo, mid, hi = lo[keep], mid[keep], hi[keep]
        flo, fmid, fhi = flo[keep], fmid[keep], fhi[keep]
        flm, frm = flm[keep], frm[keep]
        left, right = left[keep], right[keep]
        estimate = abs(total + np.sum(left + right))
        # split each remaining panel into its two halves
        lo, mid, hi = np.concatenate([lo, mid]), np.concatenate([lm[keep], rm[keep]]), np.concatenate([mid, hi])
        flo, fmid, fhi = np.concatenate([flo, fmid]), np.concatenate([flm, frm]), np.concatenate([fmid, fhi])
        whole = np.concatenate([left, right])
    raise QuadratureError(f"adaptive Simpson did not converge on [{a}, {b}] within depth {max_depth}")
