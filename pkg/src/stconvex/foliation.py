"""Level-set extrinsic geometry: second fundamental form, mean curvature,
the black-hole interior barrier scan, null expansions for warped-product
charts, and intrinsic probes on coordinate slices.

Sign convention. The extrinsic curvature of a level set of f is computed as

    K(X, Y) = - X^mu Y^nu nabla_mu nabla_nu f / sqrt(eps grad f . grad f)

on level-set tangents X, Y, with the reported unit normal oriented so that f
decreases along it. With this sign, a time function f that increases toward
the future reproduces the ADM extrinsic curvature of its slices: the r =
const cylinders of the black-hole interior (time function f = r) have
Tr K = -(2/r) (2M/r - 1)^(-1/2) (1 - 3M/(2r)), positive below the maximal
surface r = 3M/2 and negative above it, and the hyperboloidal slices of the
expanding Milne wedge (f = tau) have Tr K = 3/tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expressions as ex
from .errors import NonSpacelikeSlice, NotBlockForm, OutOfDomain, WrongSignature
from .geometry import (MetricAt, Point, SpacetimeModel, TangentVector,
                       _gradient_data, christoffels_from, covariant_hessian,
                       eval_metric)

#: tangent seeds whose g-rejection norm falls below this are unusable
BASIS_TOL = 1e-12


@dataclass(frozen=True)
class LevelSetFrame:
    """Unit normal and a g-orthonormal tangent basis for the level set of f
    through a point. epsilon is +1 for a spacelike gradient (timelike level
    set) and -1 for a timelike gradient (spacelike level set); the normal
    satisfies g(n, n) = epsilon and n^mu d_mu f < 0."""

    point: Point
    epsilon: int
    norm: float
    unit_normal: TangentVector
    tangent_basis: tuple[TangentVector, ...]


def level_set_frame(f: ex.ScalarField, model: SpacetimeModel, p: Point,
                    metric_at: MetricAt | None = None) -> LevelSetFrame:
    jet, metric_at, eps, norm, grad_up = _gradient_data(f, model, p, metric_at)
    n = -eps * grad_up / norm
    basis = _tangent_basis(metric_at.g, n)
    return LevelSetFrame(
        point=p, epsilon=eps, norm=norm,
        unit_normal=TangentVector(tuple(n), p),
        tangent_basis=tuple(TangentVector(tuple(b), p) for b in basis),
    )


def _tangent_basis(g, n):
    """Greedy Gram-Schmidt against the normal: at each step take the
    coordinate seed with the largest |g-rejection norm| (index order breaks
    ties), so the basis is deterministic."""
    d = g.shape[0]
    gnn = float(n @ g @ n)
    accepted = []
    remaining = list(range(d))
    for _ in range(d - 1):
        best = None
        for k in remaining:
            v = np.zeros(d)
            v[k] = 1.0
            v = v - (float(v @ g @ n) / gnn) * n
            for b in accepted:
                v = v - float(v @ g @ b) * math.copysign(1.0, float(b @ g @ b)) * b
            w2 = float(v @ g @ v)
            if best is None or abs(w2) > abs(best[2]):
                best = (k, v, w2)
        k, v, w2 = best
        if abs(w2) < BASIS_TOL:
            raise WrongSignature("could not build a non-null tangent basis from "
                                 "coordinate seeds at this point")
        accepted.append(v / math.sqrt(abs(w2)))
        remaining.remove(k)
    return accepted


def second_fundamental_form(f: ex.ScalarField, model: SpacetimeModel, p: Point,
                            frame: LevelSetFrame | None = None) -> np.ndarray:
    """K on the frame's tangent basis, per the module sign convention."""
    metric_at = eval_metric(model, p)
    if frame is None:
        frame = level_set_frame(f, model, p, metric_at)
    h = covariant_hessian(f, model, p, metric_at=metric_at)
    basis = np.array([b.components for b in frame.tangent_basis])
    return -(basis @ h @ basis.T) / frame.norm


def mean_curvature(f: ex.ScalarField, model: SpacetimeModel, p: Point) -> float:
    """Tr K traced with the induced inverse metric h^{mu nu} = g^{mu nu} -
    eps n^mu n^nu (the ambient trace would double-count the normal)."""
    metric_at = eval_metric(model, p)
    frame = level_set_frame(f, model, p, metric_at)
    hess = covariant_hessian(f, model, p, metric_at=metric_at)
    n = frame.unit_normal.array()
    h_up = metric_at.g_inverse - frame.epsilon * np.outer(n, n)
    return float(-np.einsum("mn,mn->", h_up, hess) / frame.norm)


def schwarzschild_trk(r: float, m: float) -> float:
    """Closed-form mean curvature of the r = const cylinder inside the
    horizon: -(2/r) (2M/r - 1)^(-1/2) (1 - 3M/(2r)); zero at r = 3M/2."""
    if not 0.0 < r < 2.0 * m:
        raise OutOfDomain(f"r = {r!r} is outside the interior chart (0, 2M) for M = {m!r}")
    return -(2.0 / r) * (2.0 * m / r - 1.0) ** -0.5 * (1.0 - 3.0 * m / (2.0 * r))


@dataclass(frozen=True)
class BarrierScanResult:
    """Sampled Tr K(r) over an interior radius range, with sign-change
    brackets. sign_pattern_ok records whether Tr K > 0 strictly below 3M/2
    and < 0 strictly above it on the sampled radii."""

    m: float
    r_samples: tuple[tuple[float, float], ...]  # (r, TrK), strictly increasing r
    zero_crossings: tuple[tuple[float, float], ...]
    sign_pattern_ok: bool


def barrier_scan(m: float, r_lo: float, r_hi: float, n: int) -> BarrierScanResult:
    if not 0.0 < r_lo < r_hi < 2.0 * m:
        raise OutOfDomain(f"scan range [{r_lo!r}, {r_hi!r}] must sit inside (0, 2M), M = {m!r}")
    if n < 2:
        raise OutOfDomain("need at least 2 samples")
    radii = np.linspace(r_lo, r_hi, n)
    values = [schwarzschild_trk(float(r), m) for r in radii]
    crossings = []
    for i in range(n - 1):
        if values[i] == 0.0:
            crossings.append((float(radii[max(i - 1, 0)]), float(radii[min(i + 1, n - 1)])))
        elif values[i] * values[i + 1] < 0.0:
            crossings.append((float(radii[i]), float(radii[i + 1])))
    barrier = 1.5 * m
    ok = all(v > 0.0 for r, v in zip(radii, values) if r < barrier) and \
         all(v < 0.0 for r, v in zip(radii, values) if r > barrier)
    return BarrierScanResult(
        m=m,
        r_samples=tuple((float(r), float(v)) for r, v in zip(radii, values)),
        zero_crossings=tuple(crossings),
        sign_pattern_ok=ok,
    )


def null_expansions(model: SpacetimeModel, base_point) -> tuple[float, float]:
    """(theta_plus, theta_minus) of the symmetry fiber through a 2D base
    point of a declared warped-product chart: theta = (2/R) l^a d_a R for the
    two future null directions l of the base block, each normalized against
    the declared future unit timelike vector by g(l, that) = -1. theta_plus
    is the direction of increasing area radius when one exists."""
    bf = model.block_form
    if bf is None:
        raise NotBlockForm(f"model '{model.name}' declares no warped-product split")
    ia, ib = bf.base_indices
    base_names = (model.coordinate_names[ia], model.coordinate_names[ib])
    fiber = set(model.coordinate_names) - set(base_names)
    for node in (model.components[ia][ia], model.components[ia][ib],
                 model.components[ib][ib], bf.area_radius):
        bad = ex.symbols_in(node) & fiber
        if bad:
            raise NotBlockForm(f"base block depends on fiber coordinate '{sorted(bad)[0]}'")
    fiber_indices = [i for i in range(model.dimension) if i not in (ia, ib)]
    for i in (ia, ib):
        for j in fiber_indices:
            node = model.components[i][j]
            if not (isinstance(node, ex.Num) and node.value == 0.0):
                raise NotBlockForm("metric mixes base and fiber coordinates; "
                                   "no warped-product split at this chart")
    values = tuple(float(v) for v in base_point)
    if len(values) != 2:
        raise ValueError("base_point must supply exactly the two base coordinates")
    params = model.parameters
    gamma = np.zeros((2, 2))
    for (a, i), (b, j) in (((0, ia), (0, ia)), ((0, ia), (1, ib)), ((1, ib), (1, ib))):
        v = ex.eval_value(model.components[i][j], base_names, values, params)
        gamma[a, b] = gamma[b, a] = v
    eigenvalues, vectors = np.linalg.eigh(gamma)
    if not (eigenvalues[0] < 0.0 < eigenvalues[1]):
        raise WrongSignature(f"base block is not Lorentzian at {values}")
    u_hat = vectors[:, 0] / math.sqrt(-eigenvalues[0])
    s_hat = vectors[:, 1] / math.sqrt(eigenvalues[1])
    future = np.array(bf.future, dtype=float)
    if float(future @ gamma @ future) >= 0.0:
        raise NotBlockForm("declared future direction is not timelike at this point")
    if float(u_hat @ gamma @ future) > 0.0:
        u_hat = -u_hat
    radius_jet = ex.eval_jet1(bf.area_radius, base_names, values, params)
    radius = radius_jet.value
    if radius <= 0.0:
        raise OutOfDomain(f"area radius {radius!r} must be positive")
    d_radius = np.array(radius_jet.gradient)
    if float(s_hat @ d_radius) < 0.0:
        s_hat = -s_hat
    t_hat = future / math.sqrt(-float(future @ gamma @ future))
    out = []
    for sign in (+1.0, -1.0):
        ell = u_hat + sign * s_hat
        ell = ell / (-float(ell @ gamma @ t_hat))
        out.append(2.0 / radius * float(ell @ d_radius))
    return out[0], out[1]


@dataclass(frozen=True)
class SliceSpec:
    """A coordinate-constant hypersurface x^k = value."""

    coordinate: str
    value: float


def _slice_data(model: SpacetimeModel, spec: SliceSpec, p: Point):
    if spec.coordinate not in model.coordinate_names:
        raise ValueError(f"'{spec.coordinate}' is not a coordinate of '{model.name}'")
    k = model.coordinate_names.index(spec.coordinate)
    if abs(p.coordinates[k] - spec.value) > 1e-9:
        raise ValueError(f"point {p.coordinates} is not on the slice "
                         f"{spec.coordinate} = {spec.value!r}")
    names = tuple(nm for i, nm in enumerate(model.coordinate_names) if i != k)
    values = tuple(c for i, c in enumerate(p.coordinates) if i != k)
    indices = [i for i in range(model.dimension) if i != k]
    d = len(indices)
    h = np.zeros((d, d))
    dh = np.zeros((d, d, d))
    for a in range(d):
        for b in range(a, d):
            node = ex.substitute(model.components[indices[a]][indices[b]],
                                 spec.coordinate, spec.value)
            jet = ex.eval_jet1(node, names, values, model.parameters)
            h[a, b] = h[b, a] = jet.value
            for lam in range(d):
                dh[lam, a, b] = dh[lam, b, a] = jet.gradient[lam]
    eigenvalues = np.linalg.eigvalsh(h)
    if eigenvalues[0] <= 1e-10:
        raise NonSpacelikeSlice(
            f"induced metric on {spec.coordinate} = {spec.value!r} is not positive "
            f"definite at {p.coordinates} (smallest eigenvalue {eigenvalues[0]:.3e})")
    return k, names, values, h, dh


def induced_metric(model: SpacetimeModel, spec: SliceSpec, p: Point) -> np.ndarray:
    """Positive-definite induced metric on the slice, in the surviving
    coordinates' order."""
    return _slice_data(model, spec, p)[3]


def _restricted_hessian_data(f, model, spec, p):
    _, names, values, h, dh = _slice_data(model, spec, p)
    h_inv = np.linalg.solve(h, np.eye(h.shape[0]))
    h_inv = 0.5 * (h_inv + h_inv.T)
    gamma = christoffels_from(h_inv, dh)
    restricted = ex.substitute(f.ast, spec.coordinate, spec.value)
    jet = ex.eval_jet2(restricted, names, values, model.parameters)
    ddf = jet.hessian - np.einsum("l,lmn->mn", jet.gradient, gamma)
    return h_inv, ddf


def slice_restricted_hessian(f: ex.ScalarField, model: SpacetimeModel,
                             spec: SliceSpec, p: Point) -> np.ndarray:
    """Intrinsic covariant Hessian D_i D_j (f restricted to the slice), using
    the induced metric's own connection."""
    return _restricted_hessian_data(f, model, spec, p)[1]


def slice_laplacian(f: ex.ScalarField, model: SpacetimeModel,
                    spec: SliceSpec, p: Point) -> float:
    """Trace of the restricted Hessian with the induced inverse metric."""
    h_inv, ddf = _restricted_hessian_data(f, model, spec, p)
    return float(np.einsum("mn,mn->", h_inv, ddf))


__all__ = [
    "BarrierScanResult", "LevelSetFrame", "SliceSpec", "barrier_scan",
    "induced_metric", "level_set_frame", "mean_curvature", "null_expansions",
    "schwarzschild_trk", "second_fundamental_form", "slice_laplacian",
    "slice_restricted_hessian",
]
