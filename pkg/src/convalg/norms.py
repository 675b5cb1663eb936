"""Norms of finitely supported algebroid elements.

Three quantities per element:

* the exact l1 operator norm, symmetrized with the involution so that star
  becomes isometric (the asymmetric one-sided norm is exposed separately),
* a floating-point operator (l2) norm of the depth-truncated matrix
  realization, computed by power iteration with a certified residual; for
  the graph family the truncation gives a lower bound that increases with
  the depth,
* an exact upper bound for any involutive representation, obtained from the
  chart decomposition of the element (sum over charts of the coefficient
  supremum times the chart fiber weight).

Gaussian coefficients use the envelope |a| + |b| in the exact norms, an
over-estimate compatible with submultiplicativity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np

from .convcat import AlgebroidElement, star

RESIDUAL_TOL = 1e-12


def realization_matrix(el: AlgebroidElement, depth: int) -> np.ndarray:
    cols = el.family.columns(el, depth)
    col_labels = sorted(cols.keys())
    row_labels = sorted({r for image in cols.values() for r in image})
    use_complex = el.family.ring.kind == "Qi"
    a = np.zeros((len(row_labels), len(col_labels)), dtype=complex if use_complex else float)
    row_idx = {r: i for i, r in enumerate(row_labels)}
    for j, c in enumerate(col_labels):
        for r, v in cols[c].items():
            a[row_idx[r], j] = v.to_complex() if use_complex else float(v.re)
    return a


def i_norm_left(el: AlgebroidElement, depth: int = 4) -> Fraction:
    """One-sided l1 -> l1 operator norm: max over source points of column sums."""
    cols = el.family.columns(el, depth)
    best = Fraction(0)
    for image in cols.values():
        s = sum((v.abs_envelope() for v in image.values()), Fraction(0))
        if s > best:
            best = s
    return best


def i_norm(el: AlgebroidElement, depth: int = 4) -> Fraction:
    """Involution-symmetrized l1 norm: max of the one-sided norms of f and f*."""
    if el.family.ring.kind not in ("Q", "Qi", "Z", "Z1p"):
        raise ValueError(f"unsupported ring {el.family.ring.name}")
    return max(i_norm_left(el, depth), i_norm_left(star(el), depth))


def top_eigenvalue_psd(b: np.ndarray, tol: float = RESIDUAL_TOL) -> Tuple[float, float]:
    """Largest eigenvalue of a Hermitian PSD matrix with a residual certificate.

    Power iteration accelerated by repeated squaring.  The squared-and-
    normalized power of the matrix converges to (a multiple of) the spectral
    projector onto the top eigenspace, so its dominant columns are faithful
    starting vectors; single fixed seeds are not, because a symmetric matrix
    can hold them in a proper invariant subspace exactly.  The returned
    Rayleigh quotient is always a lower bound for the top eigenvalue of a
    PSD matrix, and the residual bounds its distance to the nearest
    eigenvalue.
    """
    n = b.shape[0]
    if n == 0:
        return 0.0, 0.0
    scale = float(np.max(np.abs(b)))
    if scale == 0.0:
        return 0.0, 0.0
    c = b / scale
    for _ in range(80):
        c2 = c @ c
        m = float(np.max(np.abs(c2)))
        if m == 0.0 or not np.isfinite(m):
            break
        c = c2 / m

    col_norms = np.linalg.norm(c, axis=0)
    order = np.argsort(-col_norms)
    candidates: List[np.ndarray] = [c[:, j] for j in order[:3] if col_norms[j] > 0]
    candidates.append(np.ones(n, dtype=b.dtype))
    candidates.append(np.random.RandomState(0).standard_normal(n).astype(b.dtype))

    best_rho, best_res = 0.0, 0.0
    for v0 in candidates:
        nv = float(np.linalg.norm(v0))
        if nv < 1e-120:
            continue
        v = v0 / nv
        rho, res = 0.0, np.inf
        for _ in range(500):
            w = b @ v
            rho = float(np.real(np.vdot(v, w)))
            res = float(np.linalg.norm(w - rho * v))
            if res <= tol * max(1.0, abs(rho)):
                break
            nw = float(np.linalg.norm(w))
            if nw == 0.0:
                break
            v = w / nw
        if rho > best_rho:
            best_rho, best_res = rho, res
    return best_rho, best_res


def reduced_norm(el: AlgebroidElement, depth: int = 4) -> Tuple[float, float]:
    """Largest singular value of the depth-truncated realization, with error bound."""
    a = realization_matrix(el, depth)
    if a.size == 0:
        return 0.0, 0.0
    b = a.conj().T @ a
    rho, res = top_eigenvalue_psd(b)
    sigma = float(np.sqrt(max(rho, 0.0)))
    err = res / (2.0 * sigma) if sigma > 0 else float(np.sqrt(res))
    return sigma, err


def max_norm_bound(el: AlgebroidElement) -> Fraction:
    """Exact upper bound over all involutive representations, chart by chart."""
    return el.family.chart_bound(el)


@dataclass
class NormReport:
    i_norm: Fraction
    reduced: float
    reduced_err: float
    max_bound: Fraction
    depth: int

    def ordering_ok(self, tol: float = 1e-9) -> bool:
        return self.reduced <= float(self.i_norm) + tol and self.reduced <= float(self.max_bound) + tol

    def as_dict(self) -> Dict[str, object]:
        return {
            "i_norm": str(self.i_norm),
            "reduced_norm": repr(self.reduced),
            "reduced_error_bound": repr(self.reduced_err),
            "max_norm_bound": str(self.max_bound),
            "depth": self.depth,
        }

    def __str__(self):
        return (
            f"I-norm        = {self.i_norm}\n"
            f"reduced norm  = {self.reduced!r} (+/- {self.reduced_err:.2e}, depth {self.depth})\n"
            f"max-norm bound = {self.max_bound}"
        )


def norm_report(el: AlgebroidElement, depth: int = 4) -> NormReport:
    red, err = reduced_norm(el, depth)
    return NormReport(i_norm(el, depth), red, err, max_norm_bound(el), depth)
