"""Finite-rank approximation ``g(x) = sum_j y_j zeta_j(phi_j(x))`` of maps K -> Y.

Y is an inner-product grid space. The range of f over the training samples is
covered by a greedy net of computed outputs at radius eps/3; a hat partition
of unity over those templates gives the convex-combination map P~. Its
coordinates in an orthonormal basis of the template span are scalar
functionals on K, each approximated by :func:`assemble.build_approximant` at
accuracy eps/(3d). Every scalar term of coordinate l becomes one output atom
``amplitude * e_l``; terms sharing the same measurement are merged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .assemble import (MODEL_VERSION, Coverage, FunctionalApproximant, MeasurementSet,
                       _max, build_approximant)
from .config import FitConfig
from .cover import SampleSet, farthest_point_net
from .errors import ApproxError, EvaluationError, UncoveredPointError, UsageError
from .pou import covered_mask, hat_weights
from .project import _build
from .ridge import ZetaSpec
from .space import Grid, GridFunction, ProductPoint


@dataclass(frozen=True)
class RangeNet:
    grid: Grid
    templates: np.ndarray  # (m, size) computed outputs
    radius: float
    indices: tuple = ()

    @property
    def template_functions(self) -> List[GridFunction]:
        return [GridFunction(self.grid, t) for t in self.templates]

    def weights_many(self, Z) -> np.ndarray:
        return hat_weights(self.templates, self.radius, np.atleast_2d(Z), self.grid.weight)

    def project_many(self, Z) -> np.ndarray:
        return self.weights_many(Z) @ self.templates

    def covered_many(self, Z) -> np.ndarray:
        return covered_mask(self.templates, self.radius, np.atleast_2d(Z), self.grid.weight)


@dataclass(frozen=True)
class RangeBasis:
    """Orthonormal basis of the template span; ``coords`` is the isometry q."""

    grid: Grid
    E: np.ndarray  # (d, size)

    @property
    def d(self) -> int:
        return self.E.shape[0]

    @property
    def ortho_basis(self) -> List[GridFunction]:
        return [GridFunction(self.grid, e) for e in self.E]

    def coords(self, Z) -> np.ndarray:
        return self.grid.weight * (np.atleast_2d(Z) @ self.E.T)

    def synthesize(self, C) -> np.ndarray:
        return np.atleast_2d(C) @ self.E


def _output_values(outputs) -> tuple:
    outs = list(outputs)
    if not outs:
        raise UsageError("need at least one output")
    grid = outs[0].grid
    return grid, np.stack([o.values for o in outs])


def build_range_net(outputs, radius: float) -> RangeNet:
    """Greedy farthest-point net of computed outputs in the Y-norm."""
    grid, Z = _output_values(outputs)
    idx, _ = farthest_point_net(Z, grid.weight, radius)
    return RangeNet(grid, Z[list(idx)], float(radius), idx)


def range_pou_project(net: RangeNet, z: GridFunction) -> GridFunction:
    """``sum_k y_k psi_k(z)`` over the net templates."""
    if z.grid != net.grid:
        raise UsageError("output lives on a different grid than the templates")
    return GridFunction(net.grid, net.project_many(z.values[None])[0])


def build_range_basis(net: RangeNet, rank_tol: float = 1e-10) -> RangeBasis:
    P = _build(net.grid, 1, net.templates, rank_tol)
    return RangeBasis(net.grid, np.array(P.Q))


@dataclass
class FiniteRankOperator:
    range_grid: Grid
    atoms: np.ndarray  # (r, range size)
    measurements: MeasurementSet
    zetas: tuple
    metadata: dict = field(default_factory=dict)
    coverage: Optional[dict] = None

    def __post_init__(self):
        self.zetas = tuple(self.zetas)
        if not (self.atoms.shape[0] == len(self.zetas) == self.measurements.r):
            raise UsageError("atoms, measurements and nonlinearities must align")

    @property
    def r(self) -> int:
        return len(self.zetas)

    @property
    def grid(self) -> Grid:
        return self.measurements.grid

    @property
    def n(self) -> int:
        return self.measurements.n

    def coefficients_many(self, X) -> np.ndarray:
        S = self.measurements.measure_many(X)
        out = np.empty_like(S)
        for j, z in enumerate(self.zetas):
            out[:, j] = z(S[:, j])
        return out

    def apply_many(self, X) -> np.ndarray:
        return self.coefficients_many(X) @ self.atoms

    def covered_many(self, X, Z=None) -> np.ndarray:
        """Inputs covered by every coordinate partition of unity (and outputs ``Z``
        covered by the range net, when given)."""
        cov = np.ones(len(X), dtype=bool)
        if self.coverage is None:
            return cov
        for c in self.coverage["coordinates"]:
            cov &= c.covered_many(X)
        if Z is not None:
            cov &= self.coverage["range"].covered_many(Z)
        return cov

    def to_dict(self) -> dict:
        terms = [{"kind": z.kind, "amplitude": float(z.amplitude),
                  "representers": h.tolist()}
                 for z, h in zip(self.zetas, self.measurements.representers)]
        out = {"version": MODEL_VERSION, "grid": self.grid.to_dict(), "n": self.n,
               "terms": terms, "atoms": self.atoms.tolist(),
               "range_grid": self.range_grid.to_dict(), "metadata": self.metadata}
        if self.coverage is not None:
            rn = self.coverage["range"]
            out["coverage"] = {
                "coordinates": [c.to_dict() for c in self.coverage["coordinates"]],
                "range": {"radius": rn.radius, "templates": rn.templates.tolist()},
            }
        return out

    @classmethod
    def from_dict(cls, d) -> "FiniteRankOperator":
        if d.get("version") != MODEL_VERSION:
            raise UsageError(f"unsupported model version {d.get('version')!r}")
        grid, n = Grid.from_dict(d["grid"]), int(d["n"])
        rgrid = Grid.from_dict(d["range_grid"])
        r = len(d["terms"])
        H = np.asarray([t["representers"] for t in d["terms"]], dtype=np.float64)
        H = H.reshape(r, n, grid.size)
        atoms = np.asarray(d["atoms"], dtype=np.float64).reshape(r, rgrid.size)
        zetas = [ZetaSpec(t["kind"], float(t["amplitude"])) for t in d["terms"]]
        cov = None
        if "coverage" in d:
            c = d["coverage"]
            cov = {"coordinates": [Coverage.from_dict(grid, n, x) for x in c["coordinates"]],
                   "range": RangeNet(rgrid, np.asarray(c["range"]["templates"], dtype=np.float64),
                                     float(c["range"]["radius"]))}
        return cls(rgrid, atoms, MeasurementSet(grid, H), zetas, d.get("metadata", {}), cov)


def apply(g: FiniteRankOperator, x: ProductPoint) -> GridFunction:
    """``sum_j y_j zeta_j(phi_j(x))``."""
    if x.grid != g.grid or x.n != g.n:
        raise UsageError("point shape does not match the operator")
    return GridFunction(g.range_grid, g.apply_many(x.values[None])[0])


def evaluate_map(f: Callable, samples: SampleSet) -> tuple:
    """Outputs of ``f`` on every sample as (range grid, (N, size) array)."""
    outs = []
    for i, p in enumerate(samples.points):
        z = f(p)
        if not isinstance(z, GridFunction):
            raise UsageError("operator handles must return GridFunctions")
        if not np.all(np.isfinite(z.values)):
            raise EvaluationError(f"map returned non-finite output at sample {i}", index=i)
        outs.append(z)
    return _output_values(outs)


def _merge_terms(models: List[FunctionalApproximant], basis: RangeBasis):
    """Turn per-coordinate scalar terms into (representer, kind, atom) triples.

    Terms with identical kind and representer (for instance every constant
    term) share one measurement and their atoms are summed.
    """
    keys, reps, kinds, atoms = {}, [], [], []
    for ell, g in enumerate(models):
        for h, z in zip(g.measurements.representers, g.zetas):
            atom = z.amplitude * basis.E[ell]
            key = (z.kind, h.tobytes())
            if key in keys:
                atoms[keys[key]] = atoms[keys[key]] + atom
                continue
            keys[key] = len(reps)
            reps.append(h)
            kinds.append(z.kind)
            atoms.append(atom)
    return np.array(reps), kinds, np.array(atoms)


def _no_call(_x):
    raise RuntimeError("coordinate functional values are precomputed")


def build_operator(f: Callable, train: SampleSet, val: SampleSet, epsilon: float,
                   config: Optional[FitConfig] = None, seed: int = 0) -> FiniteRankOperator:
    """Finite-rank approximant of the map ``f`` with Y-error targeted below ``epsilon``."""
    if not epsilon > 0:
        raise UsageError("epsilon must be positive")
    cfg = config or FitConfig()
    try:
        rgrid, Ztr = evaluate_map(f, train)
        _, Zva = evaluate_map(f, val)
    except ApproxError as exc:
        raise exc.with_stage("evaluate")
    w = rgrid.weight

    idx, _ = farthest_point_net(Ztr, w, epsilon / 3.0)
    net = RangeNet(rgrid, Ztr[list(idx)], epsilon / 3.0, idx)
    basis = build_range_basis(net, cfg.rank_tol)
    d = basis.d

    Ptr = net.project_many(Ztr)
    Ftr = basis.coords(Ptr)
    rcov = net.covered_many(Zva)
    vidx = np.nonzero(rcov)[0]
    if vidx.size == 0:
        raise UncoveredPointError("no validation output is covered by the range net",
                                  stage="range_net")
    val_c = val.subset(vidx, "val_covered")
    Pva = net.project_many(Zva[vidx])
    Fva = basis.coords(Pva)

    coord_eps = epsilon / (3.0 * d)
    models = []
    for ell in range(d):
        try:
            g_ell = build_approximant(_no_call, train, val_c, coord_eps, cfg, seed,
                                      f_train=Ftr[:, ell], f_val=Fva[:, ell])
        except ApproxError as exc:
            raise exc.with_stage(f"coordinate {ell}")
        models.append(g_ell)

    reps, kinds, atoms = _merge_terms(models, basis)
    meas = MeasurementSet(train.grid, reps)
    zetas = [ZetaSpec(k, 1.0) for k in kinds]
    coverage = {"coordinates": [m.coverage for m in models], "range": net}
    op = FiniteRankOperator(rgrid, atoms, meas, zetas, {}, coverage)

    # validation bookkeeping on points covered at every stage
    in_cov = np.ones(vidx.size, dtype=bool)
    for m in models:
        in_cov &= m.coverage.covered_many(val_c.values)
    Xv = val_c.values[in_cov]
    Gv = np.stack([m.evaluate_many(Xv) for m in models], axis=1) if in_cov.any() \
        else np.zeros((0, d))
    range_res = np.sqrt(w * np.sum((Zva[vidx] - Pva) ** 2, axis=1))
    coord_err = np.abs(Fva[in_cov] - Gv)
    gval = op.apply_many(Xv)
    e2e = np.sqrt(w * np.sum((Zva[vidx][in_cov] - gval) ** 2, axis=1))
    synth_gap = np.sqrt(w * np.sum((basis.synthesize(Gv) - gval) ** 2, axis=1)) \
        if in_cov.any() else np.zeros(0)
    op.metadata = {
        "epsilon": float(epsilon),
        "range_net_size": len(idx),
        "range_dim": d,
        "coordinate_epsilon": coord_eps,
        "r": op.r,
        "seed": int(seed),
        "val_covered": int(in_cov.sum()),
        "val_uncovered": int(len(val) - in_cov.sum()),
        "coordinates": [m.metadata for m in models],
        "stage_residuals": {
            "range_pou_max_residual_val": _max(range_res[in_cov]),
            "range_pou_max_residual_train": _max(np.sqrt(w * np.sum((Ztr - Ptr) ** 2, axis=1))),
            "coordinate_max_error_val": [_max(coord_err[:, l]) for l in range(d)],
            "end_to_end_max_error_val": _max(e2e),
            "synthesis_max_discrepancy_val": _max(synth_gap),
        },
    }
    op._range_basis, op._models = basis, models
    return op


def sup_error(f: Callable, g: FiniteRankOperator, test: SampleSet) -> dict:
    """Max and mean Y-error over test points covered at every stage."""
    _, Z = evaluate_map(f, test)
    G = g.apply_many(test.values)
    err = np.sqrt(g.range_grid.weight * np.sum((Z - G) ** 2, axis=1))
    cov = g.covered_many(test.values, Z)
    return {
        "max_error": _max(err[cov]),
        "mean_error": float(err[cov].mean()) if cov.any() else 0.0,
        "covered_count": int(cov.sum()),
        "uncovered_count": int((~cov).sum()),
        "outputs": Z, "approx": G, "abs_error": err, "covered": cov,
    }
