"""Pointwise metric evaluation, Christoffel symbols, covariant Hessians, and
causal classification on an arbitrary coordinate chart.

Conventions fixed throughout the package: signature (-, +, ..., +), geometric
units (G = c = 1), index order Gamma[mu, nu, rho] = Gamma^mu_{nu rho}, and
metric-derivative array dg[lam, mu, nu] = d_lam g_{mu nu}.

All operations here are pure functions of their inputs and safe to evaluate
concurrently over disjoint points.
"""

from __future__ import annotations

import enum
import weakref
from dataclasses import dataclass, field, replace

import numpy as np

from . import expressions as ex
from .errors import (DomainError, NullGradient, SingularMetric, UnknownSymbol,
                     WrongSignature)

#: eigenvalues with magnitude below this count as zero in signature checks
SIGNATURE_TOL = 1e-10
#: |det g| below this is treated as degenerate
DET_TOL = 1e-12
#: reject metrics whose condition estimate exceeds this
CONDITION_CAP = 1e12
#: minimum allowed distance (in the locus expression's value) from singular loci
LOCUS_GUARD = 1e-6
#: |g(V, V)| below this classifies V as null
NULL_TOL = 1e-10


@dataclass(frozen=True)
class Point:
    """An event: ordered chart coordinates."""

    coordinates: tuple[float, ...]

    def __init__(self, coordinates):
        object.__setattr__(self, "coordinates", tuple(float(c) for c in coordinates))

    def __len__(self):
        return len(self.coordinates)

    def array(self) -> np.ndarray:
        return np.array(self.coordinates)


@dataclass(frozen=True)
class TangentVector:
    """Contravariant components V^mu attached to a base point."""

    components: tuple[float, ...]
    base: Point

    def __init__(self, components, base):
        object.__setattr__(self, "components", tuple(float(c) for c in components))
        object.__setattr__(self, "base", base)

    def array(self) -> np.ndarray:
        return np.array(self.components)


@dataclass(frozen=True)
class BlockForm:
    """Declared 2+2 warped-product split: a 2D Lorentzian base block whose
    components depend only on the base coordinates, plus round fibers of area
    radius R(y). `future` is a base-block vector fixing the future time
    orientation."""

    base_indices: tuple[int, int]
    area_radius: ex.Expr
    area_radius_source: str
    future: tuple[float, float]


@dataclass(frozen=True, eq=False)
class SpacetimeModel:
    """A coordinate chart plus metric-component expressions and parameters.

    `components` is a symmetric matrix of expression ASTs; symmetric entries
    share the same AST object so evaluated matrices are symmetric to the bit.
    `singular_loci` are expressions whose zero sets the chart must avoid
    (enforced with a guard of LOCUS_GUARD on the expression value).
    """

    name: str
    dimension: int
    coordinate_names: tuple[str, ...]
    components: tuple[tuple[ex.Expr, ...], ...]
    component_sources: tuple[tuple[str, ...], ...]
    parameters: dict[str, float] = field(default_factory=dict)
    singular_loci: tuple[ex.Expr, ...] = ()
    singular_locus_description: str = ""
    sample_box: tuple[tuple[float, float], ...] | None = None
    block_form: BlockForm | None = None

    @classmethod
    def from_components(cls, name, coordinate_names, components, parameters=None,
                        singular_loci=(), singular_locus_description="",
                        sample_box=None, block_form=None):
        """Build a model from a dict mapping (i, j) index pairs (upper triangle
        suffices) to component source text. Unlisted components are zero."""
        coords = tuple(coordinate_names)
        dim = len(coords)
        if dim < 2:
            raise ValueError("a spacetime chart needs at least 2 coordinates")
        parameters = dict(parameters or {})
        declared = coords + tuple(parameters)
        zero = ex.Num(0.0)
        asts = [[zero] * dim for _ in range(dim)]
        sources = [["0"] * dim for _ in range(dim)]
        for (i, j), text in components.items():
            node = ex.parse(text, declared)
            asts[i][j] = node
            asts[j][i] = node
            sources[i][j] = text
            sources[j][i] = text
        loci = tuple(ex.parse(t, declared) for t in singular_loci)
        bf = None
        if block_form is not None:
            base, radius_text, future = block_form
            bf = BlockForm(tuple(base), ex.parse(radius_text, declared), radius_text,
                           tuple(float(c) for c in future))
        return cls(name=name, dimension=dim, coordinate_names=coords,
                   components=tuple(tuple(row) for row in asts),
                   component_sources=tuple(tuple(row) for row in sources),
                   parameters=parameters, singular_loci=loci,
                   singular_locus_description=singular_locus_description,
                   sample_box=tuple(sample_box) if sample_box else None, block_form=bf)

    def with_parameters(self, **overrides) -> "SpacetimeModel":
        unknown = set(overrides) - set(self.parameters)
        if unknown:
            raise UnknownSymbol(sorted(unknown)[0])
        merged = dict(self.parameters)
        merged.update({k: float(v) for k, v in overrides.items()})
        return replace(self, parameters=merged)

    def field(self, text: str) -> ex.ScalarField:
        """Parse a scalar-field expression over this chart."""
        return ex.ScalarField.from_text(text, self.coordinate_names + tuple(self.parameters))


@dataclass(frozen=True, eq=False)
class MetricAt:
    """Metric data at one point: components, inverse, first derivatives, and
    Christoffel symbols Gamma^mu_{nu rho}."""

    point: Point
    g: np.ndarray
    g_inverse: np.ndarray
    first_derivatives: np.ndarray  # dg[lam, mu, nu] = d_lam g_{mu nu}
    christoffels: np.ndarray


class VectorClass(enum.Enum):
    TIMELIKE = "timelike"
    NULL = "null"
    SPACELIKE = "spacelike"


def _signature_counts(matrix, tol=SIGNATURE_TOL):
    eigenvalues = np.linalg.eigvalsh(matrix)
    negative = int(np.sum(eigenvalues < -tol))
    zero = int(np.sum(np.abs(eigenvalues) <= tol))
    return negative, zero, len(eigenvalues) - negative - zero


def is_lorentzian(matrix, tol=SIGNATURE_TOL) -> bool:
    negative, zero, positive = _signature_counts(matrix, tol)
    return negative == 1 and zero == 0 and positive == matrix.shape[0] - 1


class MetricEvaluator:
    """Prepared evaluator for one model; the hot path for integrators.

    Component expressions are compiled to plain-float closures once at
    preparation time, and constant-component charts (e.g. flat space in
    Cartesian coordinates) are short-circuited entirely.
    """

    def __init__(self, model: SpacetimeModel):
        self.model = model
        self.names = model.coordinate_names
        self.params = dict(model.parameters)
        d = model.dimension
        self.dim = d
        unique = []  # (ast, [(i, j) slots])
        seen = {}
        for i in range(d):
            for j in range(i, d):
                node = model.components[i][j]
                key = id(node)
                if key in seen:
                    unique[seen[key]][1].append((i, j))
                else:
                    seen[key] = len(unique)
                    unique.append((node, [(i, j)]))
        self._compiled = [(ex.compile_jet1(node, self.names, self.params), slots)
                          for node, slots in unique]
        self._loci = [(ex.compile_value(node, self.names, self.params), node)
                      for node in model.singular_loci]
        self._constant = all(isinstance(node, ex.Num) for node, _ in unique)
        self._const_data = None

    def guard(self, coords):
        """Raise SingularMetric when within the declared locus guard."""
        for fn, node in self._loci:
            if abs(fn(*coords)) < LOCUS_GUARD:
                raise SingularMetric(
                    f"point {tuple(coords)} lies on or within {LOCUS_GUARD} of the "
                    f"singular locus {ex.to_source(node)} = 0 of '{self.model.name}'")

    def locus_values(self, coords):
        """Signed locus-expression values; a sign change between two points
        means the segment crossed a singular locus."""
        return tuple(fn(*coords) for fn, _ in self._loci)

    def components(self, coords):
        """(g, dg) with dg[lam, mu, nu] = d_lam g_{mu nu}, by exact jets."""
        d = self.dim
        g = np.zeros((d, d))
        dg = np.zeros((d, d, d))
        for fn, slots in self._compiled:
            value, gradient = fn(*coords)
            for (i, j) in slots:
                g[i, j] = g[j, i] = value
                for lam in range(d):
                    dg[lam, i, j] = dg[lam, j, i] = gradient[lam]
        return g, dg

    def metric_at(self, point: Point, checks=True) -> MetricAt:
        coords = point.coordinates
        if len(coords) != self.dim:
            raise ValueError(f"point has {len(coords)} coordinates, chart has {self.dim}")
        self.guard(coords)
        if self._constant and self._const_data is not None:
            g, dg, ginv, gamma = self._const_data
            return MetricAt(point, g, ginv, dg, gamma)
        try:
            g, dg = self.components(coords)
        except DomainError as exc:
            raise DomainError(f"{exc} [metric of '{self.model.name}' at {coords}]") from None
        if not np.isfinite(g).all():
            raise SingularMetric(f"non-finite metric component at {coords}")
        if checks or self._constant:
            det = np.linalg.det(g)
            if abs(det) < DET_TOL:
                raise SingularMetric(f"|det g| = {abs(det):.3e} below tolerance at {coords}")
            if not is_lorentzian(g):
                negative, zero, positive = _signature_counts(g)
                raise WrongSignature(
                    f"metric signature ({negative} negative, {zero} zero, {positive} positive) "
                    f"is not Lorentzian at {coords}")
            cond = np.linalg.cond(g)
            if not np.isfinite(cond) or cond > CONDITION_CAP:
                raise SingularMetric(f"metric condition estimate {cond:.3e} exceeds "
                                     f"{CONDITION_CAP:.0e} at {coords}")
        try:
            ginv = np.linalg.solve(g, np.eye(self.dim))
        except np.linalg.LinAlgError:
            raise SingularMetric(f"metric is singular at {coords}") from None
        ginv = 0.5 * (ginv + ginv.T)
        gamma = christoffels_from(ginv, dg)
        if self._constant:
            self._const_data = (g, dg, ginv, gamma)
        return MetricAt(point, g, ginv, dg, gamma)


def christoffels_from(g_inverse, dg) -> np.ndarray:
    """Gamma^mu_{nu rho} = 1/2 g^{mu sig}(d_nu g_{sig rho} + d_rho g_{sig nu}
    - d_sig g_{nu rho}); exactly symmetric in (nu, rho) because dg is."""
    term1 = np.einsum("ms,nsr->mnr", g_inverse, dg)
    term2 = np.einsum("ms,rsn->mnr", g_inverse, dg)
    term3 = np.einsum("ms,snr->mnr", g_inverse, dg)
    return 0.5 * (term1 + term2 - term3)


_EVALUATORS: "weakref.WeakKeyDictionary[SpacetimeModel, MetricEvaluator]" = \
    weakref.WeakKeyDictionary()


def evaluator_for(model: SpacetimeModel) -> MetricEvaluator:
    """Cached prepared evaluator (models are immutable, so this is safe)."""
    found = _EVALUATORS.get(model)
    if found is None:
        found = MetricEvaluator(model)
        _EVALUATORS[model] = found
    return found


def eval_metric(model: SpacetimeModel, p: Point) -> MetricAt:
    """Metric components, inverse (via linear solve), and Christoffel symbols
    at a point, with degeneracy/signature/conditioning checks."""
    return evaluator_for(model).metric_at(p)


def field_jet(f: ex.ScalarField, model: SpacetimeModel, p: Point) -> ex.Jet2:
    return ex.eval_jet2(f.ast, model.coordinate_names, p.coordinates, model.parameters)


def covariant_hessian(f: ex.ScalarField, model: SpacetimeModel, p: Point,
                      metric_at: MetricAt | None = None) -> np.ndarray:
    """nabla_mu nabla_nu f = d_mu d_nu f - Gamma^lam_{mu nu} d_lam f."""
    if metric_at is None:
        metric_at = eval_metric(model, p)
    jet = field_jet(f, model, p)
    return jet.hessian - np.einsum("l,lmn->mn", jet.gradient, metric_at.christoffels)


def classify_vector(metric_at: MetricAt, v: TangentVector,
                    null_tol=NULL_TOL) -> VectorClass:
    """Causal character of V from the sign of g(V, V)."""
    if v.base != metric_at.point:
        raise ValueError("vector is not based at the metric's point")
    comps = v.array()
    if comps.shape[0] != metric_at.g.shape[0]:
        raise ValueError("vector dimension does not match the chart")
    q = float(comps @ metric_at.g @ comps)
    if abs(q) <= null_tol:
        return VectorClass.NULL
    return VectorClass.TIMELIKE if q < 0 else VectorClass.SPACELIKE


def gradient_invariant(f: ex.ScalarField, model: SpacetimeModel, p: Point,
                       null_tol=NULL_TOL) -> tuple[int, float]:
    """(eps, norm) with eps = sign of grad f . grad f and norm = sqrt(eps *
    grad f . grad f); raises NullGradient when the gradient is null."""
    _, _, eps, norm, _ = _gradient_data(f, model, p, null_tol=null_tol)
    return eps, norm


def _gradient_data(f, model, p, metric_at=None, null_tol=NULL_TOL):
    """(jet, metric_at, eps, norm, raised gradient) shared by level-set code."""
    if metric_at is None:
        metric_at = eval_metric(model, p)
    jet = field_jet(f, model, p)
    grad_up = metric_at.g_inverse @ jet.gradient
    q = float(jet.gradient @ grad_up)
    if abs(q) < null_tol:
        raise NullGradient(f"grad f . grad f = {q:.3e} at {p.coordinates}; "
                           "the level set is degenerate there")
    eps = 1 if q > 0 else -1
    return jet, metric_at, eps, float(np.sqrt(eps * q)), grad_up
