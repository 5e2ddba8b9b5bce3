"""Trigonometric ridge expansions on R^d fitted by regularized least squares.

A model is a list of terms ``amplitude * zeta(<t_j, y>)`` with ``zeta`` one of
cos, sin or the identity. Frequencies are seeded Gaussian draws; the zero
frequency (a constant) is always present. :func:`fit_auto` doubles the number
of frequencies until the largest validation residual drops below a target.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.spatial.distance import pdist

from .config import FitConfig
from .errors import EvaluationError, IllConditionedError, UsageError

KINDS = ("cos", "sin", "id")
_BASE = {"cos": np.cos, "sin": np.sin, "id": lambda s: s}


@dataclass(frozen=True)
class ZetaSpec:
    kind: str
    amplitude: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown scalar nonlinearity {self.kind!r}")
        if not np.isfinite(self.amplitude):
            raise UsageError("amplitude must be finite")

    def __call__(self, s):
        return self.amplitude * _BASE[self.kind](s)


def apply_zetas(kinds: Sequence[str], amplitudes: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Sum over terms of ``amplitude_j * base_j(S[:, j])``, shape (N,).

    Terms are accumulated in ascending index order.
    """
    kinds = np.asarray(kinds)
    out = np.zeros(S.shape[0])
    vals = np.empty_like(S)
    for k in KINDS:
        sel = kinds == k
        if np.any(sel):
            vals[:, sel] = _BASE[k](S[:, sel])
    for j in range(S.shape[1]):
        out += amplitudes[j] * vals[:, j]
    return out


@dataclass(frozen=True)
class RidgeModel:
    freqs: np.ndarray  # (r, d)
    zetas: tuple
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.freqs, dtype=np.float64))
        if F.shape[0] != len(self.zetas) or F.shape[0] < 1:
            raise UsageError("need one ZetaSpec per frequency and at least one term")
        object.__setattr__(self, "freqs", F)
        object.__setattr__(self, "zetas", tuple(self.zetas))

    @property
    def r(self) -> int:
        return len(self.zetas)

    @property
    def d(self) -> int:
        return self.freqs.shape[1]

    @property
    def kinds(self):
        return [z.kind for z in self.zetas]

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([z.amplitude for z in self.zetas])

    def eval_many(self, Y) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        if Y.shape[1] != self.d:
            raise UsageError(f"expected coordinate vectors of length {self.d}")
        return apply_zetas(self.kinds, self.amplitudes, Y @ self.freqs.T)

    def terms(self) -> List[dict]:
        return [{"kind": z.kind, "amplitude": float(z.amplitude), "freq": t.tolist()}
                for t, z in zip(self.freqs, self.zetas)]


def eval(model: RidgeModel, y) -> float:  # noqa: A001 - mirrors the documented operation name
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (model.d,):
        raise UsageError(f"expected a coordinate vector of length {model.d}")
    return float(model.eval_many(y[None, :])[0])


def sample_frequencies(d: int, count: int, scale: float, seed: int) -> np.ndarray:
    """Zero frequency followed by ``count`` seeded N(0, scale^2 I) draws, shape (count+1, d).

    The draws for a smaller ``count`` are a prefix of those for a larger one,
    so doubling ``count`` gives nested feature spaces.
    """
    if count < 1 or not scale > 0:
        raise UsageError("need count >= 1 and scale > 0")
    rng = np.random.default_rng(seed)
    T = rng.standard_normal((count, d)) * scale
    return np.vstack([np.zeros((1, d)), T])


def _term_layout(freqs: np.ndarray, identity: bool):
    rows, kinds = [], []
    for t in freqs:
        rows.append(t)
        kinds.append("cos")
        if np.any(t != 0):
            rows.append(t)
            kinds.append("sin")
    if identity:
        d = freqs.shape[1]
        rows.extend(np.eye(d))
        kinds.extend(["id"] * d)
    return np.array(rows), kinds


def design_matrix(Y: np.ndarray, rows: np.ndarray, kinds) -> np.ndarray:
    S = Y @ rows.T
    A = np.empty_like(S)
    kinds = np.asarray(kinds)
    for k in KINDS:
        sel = kinds == k
        A[:, sel] = _BASE[k](S[:, sel])
    return A


def fit(y_samples, targets, freqs, reg: float = 1e-10, identity: bool = False) -> RidgeModel:
    """Least-squares fit of cos/sin features (plus optional identity terms).

    Minimizes ``|B c - y|^2 + lam |c_P|^2`` over column-equilibrated features
    B with ``lam = reg * trace(B^T B) / p``. The penalty covers the oscillatory
    columns P only; the constant and identity columns are left free so that
    targets in their span are fitted exactly at any ``reg``. With at most as
    many features as samples the normal equations are factored; otherwise the
    equivalent dual system ``(B_P B_P^T + lam I) a + B_U c_U = y``,
    ``B_U^T a = 0``, ``c_P = B_P^T a`` is solved by Cholesky elimination.
    """
    Y = np.atleast_2d(np.asarray(y_samples, dtype=np.float64))
    b = np.asarray(targets, dtype=np.float64).reshape(-1)
    if Y.shape[0] != b.shape[0] or b.shape[0] < 1:
        raise UsageError("need one target per sample and at least one sample")
    if reg < 0:
        raise UsageError("reg must be nonnegative")
    if not np.all(np.isfinite(b)):
        bad = int(np.nonzero(~np.isfinite(b))[0][0])
        raise EvaluationError(f"non-finite target at sample {bad}", index=bad)
    freqs = np.atleast_2d(np.asarray(freqs, dtype=np.float64))
    if freqs.shape[1] != Y.shape[1]:
        raise UsageError("frequency length does not match coordinate dimension")

    rows, kinds = _term_layout(freqs, identity)
    A = design_matrix(Y, rows, kinds)
    s = np.sqrt(np.einsum("ij,ij->j", A, A))
    s[s == 0.0] = 1.0
    B = A / s
    N, p = B.shape
    lam = reg * float(np.einsum("ij,ij->", B, B)) / p
    pen = np.array([k != "id" and np.any(t != 0) for t, k in zip(rows, kinds)])
    keep = pen | _independent(B, ~pen)
    Bk, pk = B[:, keep], pen[keep]
    c = np.zeros(p)
    try:
        if Bk.shape[1] <= N:
            G = Bk.T @ Bk
            G[np.diag_indices(G.shape[0])] += lam * pk
            c[keep] = scipy.linalg.cho_solve(scipy.linalg.cho_factor(G), Bk.T @ b)
        else:
            c[keep] = _dual_solve(Bk[:, pk], Bk[:, ~pk], b, lam, pk)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(
            f"normal equations not positive definite ({exc}); try a larger reg") from exc
    if not np.all(np.isfinite(c)):
        raise IllConditionedError("non-finite amplitudes; try a larger reg")
    amps = c / s
    zetas = [ZetaSpec(k, float(a)) for k, a in zip(kinds, amps)]
    return RidgeModel(rows, zetas)


def _independent(B, mask, tol=1e-7):
    """Subset of the ``mask`` columns of ``B`` that is numerically independent.

    Unpenalized columns carry no Tikhonov term, so an exact dependence among
    them (coordinates confined to an affine subspace) would make the normal
    equations singular. Pivoted QR picks a well-conditioned subset; the
    remaining columns get amplitude zero.
    """
    out = np.zeros(B.shape[1], dtype=bool)
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return out
    _, R, piv = scipy.linalg.qr(B[:, idx], mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * diag[0])) if diag.size and diag[0] > 0 else 0
    out[idx[np.sort(piv[:rank])]] = True
    return out


def _dual_solve(BP, BU, b, lam, pen):
    K = BP @ BP.T
    K[np.diag_indices(K.shape[0])] += lam
    Kf = scipy.linalg.cho_factor(K)
    Kb = scipy.linalg.cho_solve(Kf, b)
    if BU.shape[1]:
        KU = scipy.linalg.cho_solve(Kf, BU)
        cU = scipy.linalg.cho_solve(scipy.linalg.cho_factor(BU.T @ KU), BU.T @ Kb)
        a = Kb - KU @ cU
    else:
        cU, a = np.zeros(0), Kb
    c = np.empty(pen.size)
    c[pen] = BP.T @ a
    c[~pen] = cU
    return c


def median_scale(Y: np.ndarray, max_points: int = 1000) -> float:
    """``1 / median pairwise distance`` (1.0 when all points coincide)."""
    Y = np.atleast_2d(Y)[:max_points]
    if Y.shape[0] < 2:
        return 1.0
    h = float(np.median(pdist(Y)))
    return 1.0 / h if h > 0 else 1.0


def fit_auto(y_samples, targets, val_samples, val_targets, target_err: float,
             seed: int = 0, config: Optional[FitConfig] = None) -> RidgeModel:
    """Double the frequency count from ``config.r0`` until the max validation residual
    falls below ``target_err`` or the next count would exceed ``config.r_max``
    (``r0`` itself is always tried).

    Returns the model with the smallest validation residual seen. Its ``info``
    records ``achieved_residual``, ``target_met``, ``scale`` and the per-step
    ``history``. Without validation samples the training residual is used.
    """
    if not target_err > 0:
        raise UsageError("target_err must be positive")
    cfg = config or FitConfig()
    Y = np.atleast_2d(np.asarray(y_samples, dtype=np.float64))
    b = np.asarray(targets, dtype=np.float64).reshape(-1)
    Yv = np.asarray(val_samples, dtype=np.float64).reshape(-1, Y.shape[1])
    bv = np.asarray(val_targets, dtype=np.float64).reshape(-1)
    if Yv.shape[0] == 0:
        Yv, bv = Y, b
    scale = median_scale(Y)

    best, best_res = None, np.inf
    history = []
    r = cfg.r0
    while True:
        freqs = sample_frequencies(Y.shape[1], r, scale, seed)
        model = fit(Y, b, freqs, cfg.reg, cfg.identity_terms)
        train_res = np.abs(model.eval_many(Y) - b)
        val_res = float(np.max(np.abs(model.eval_many(Yv) - bv)))
        history.append({"r": r, "terms": model.r,
                        "train_max": float(train_res.max()),
                        "train_rms": float(np.sqrt(np.mean(train_res**2))),
                        "val_max": val_res})
        if val_res < best_res:
            best, best_res = model, val_res
        if val_res < target_err or 2 * r > cfg.r_max:
            break
        r *= 2
    best.info.update(achieved_residual=best_res, target_met=bool(best_res < target_err),
                     target_err=float(target_err), scale=scale, history=history)
    return best
