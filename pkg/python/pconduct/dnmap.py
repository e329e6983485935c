"""Black-box Dirichlet-to-Neumann oracles.

Reconstruction code never sees a conductivity. It asks an oracle for
pairings ``<Lambda(f), g>`` and the oracle runs (and caches) forward solves.
Oracles compose into :class:`PairingExpression` objects, so operator
comparisons read like the operator inequalities they test::

    preorder_test(oracle, reference + 0.5 * region, dictionary)
"""

from __future__ import annotations

import logging
import math
import threading
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Literal, Protocol, runtime_checkable

import numpy as np

from pconduct.errors import ConfigError
from pconduct.geometry.mesh import TriMesh
from pconduct.geometry.scene import ConductivityScene
from pconduct.psolver import (
    BoundaryTrace,
    Pairing,
    SolverConfig,
    flux_density,
    pairing_from_solutions,
    solve_dirichlet,
)
from pconduct.wolff import WolffField, WolffSolution, boundary_trace

__all__ = [
    "Measurement",
    "Operator",
    "DnOracle",
    "ScaledOracle",
    "RegionOperator",
    "ReplayOracle",
    "PairingExpression",
    "PreorderVerdict",
    "deficit",
    "MARGIN",
    "preorder_test",
    "dictionary_taus",
    "default_dictionary",
    "trace_id",
]

logger = logging.getLogger(__name__)

# relative to |<Lambda_1 f, f>| of the trace
MARGIN = 1e-6


def trace_id(f: BoundaryTrace) -> str:
    """Stable identifier: the trace label, or a fingerprint prefix."""
    return f.label or f.fingerprint[:16]


@dataclass(frozen=True)
class Measurement:
    """One recorded self-pairing <Lambda(f), f> on the stored trace values."""

    trace_id: str
    value: float
    log_scale: float


@runtime_checkable
class Operator(Protocol):
    """Anything that answers DN pairings on one mesh."""

    mesh: TriMesh
    p: float

    def pair(self, f: BoundaryTrace, g: BoundaryTrace | None = None) -> Pairing: ...


class _Algebra:
    """Linear-combination operators shared by every pairing operator."""

    def __add__(self, other) -> PairingExpression:
        return PairingExpression.of(self) + other

    def __radd__(self, other) -> PairingExpression:
        return PairingExpression.of(other) + self

    def __sub__(self, other) -> PairingExpression:
        return PairingExpression.of(self) - other

    def __rsub__(self, other) -> PairingExpression:
        return PairingExpression.of(other) - self

    def __mul__(self, factor: float) -> PairingExpression:
        return PairingExpression.of(self) * factor

    __rmul__ = __mul__

    def __neg__(self) -> PairingExpression:
        return PairingExpression.of(self) * -1.0


# ==========================================
# Oracles
# ==========================================
class DnOracle(_Algebra):
    """Evaluates pairings of Lambda_sigma, solving each trace at most once.

    Repeated queries with an identical trace return bit-identical values.
    ``solves`` counts distinct forward solves. Safe to call from several
    threads: each fingerprint is solved under its own lock.

    Example:
        >>> oracle = DnOracle.from_scene(scene)
        >>> oracle.pair(f).value >= 0
        True
    """

    def __init__(
        self,
        mesh: TriMesh,
        sigma,
        config: SolverConfig,
        *,
        cache: bool = True,
        name: str = "sigma",
    ):
        sigma = np.asarray(sigma, dtype=float)
        if sigma.ndim == 0:
            sigma = np.full(mesh.n_cells, float(sigma))
        if sigma.shape != (mesh.n_cells,):
            raise ConfigError(f"sigma needs one value per cell ({mesh.n_cells}), got {sigma.shape}.")
        sigma.setflags(write=False)
        self.mesh = mesh
        self._sigma = sigma
        self.config = config
        self.cache_enabled = cache
        self.name = name
        self.solves = 0
        self._cache: dict[str, np.ndarray] = {}
        self._extensions: dict[str, np.ndarray] = {}
        self._measurements: dict[str, Measurement] = {}
        self._lock = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}

    @classmethod
    def from_scene(cls, scene: ConductivityScene, config: SolverConfig | None = None, **kwargs) -> DnOracle:
        config = config or SolverConfig(scene.p)
        if config.p != scene.p:
            raise ConfigError(f"Solver p = {config.p} does not match scene p = {scene.p}.")
        return cls(scene.mesh, scene.sigma, config, **kwargs)

    @classmethod
    def reference(cls, mesh: TriMesh, config: SolverConfig, **kwargs) -> DnOracle:
        """The background oracle Lambda_1."""
        kwargs.setdefault("name", "reference")
        return cls(mesh, 1.0, config, **kwargs)

    @property
    def p(self) -> float:
        return self.config.p

    @property
    def is_background(self) -> bool:
        return bool(np.all(self._sigma == 1.0))

    def _key_lock(self, key: str) -> threading.Lock:
        with self._lock:
            return self._key_locks.setdefault(key, threading.Lock())

    def _solve(self, store: dict[str, np.ndarray], sigma, f: BoundaryTrace) -> np.ndarray:
        f.check(self.mesh)
        key = f.fingerprint
        if self.cache_enabled and key in store:
            return store[key]
        with self._key_lock(key):
            if self.cache_enabled and key in store:
                return store[key]
            values = solve_dirichlet(self.mesh, sigma, f, self.config).values
            with self._lock:
                self.solves += 1
                if self.cache_enabled:
                    store[key] = values
        return values

    def solution(self, f: BoundaryTrace) -> np.ndarray:
        """Vertex values of the forward solution with boundary values ``f``."""
        return self._solve(self._cache, self._sigma, f)

    def extension(self, g: BoundaryTrace) -> np.ndarray:
        """sigma = 1 p-harmonic extension of ``g``, the test function for pairings."""
        if self.is_background:
            return self.solution(g)
        return self._solve(self._extensions, 1.0, g)

    def pair(self, f: BoundaryTrace, g: BoundaryTrace | None = None) -> Pairing:
        same = g is None or g is f or g.fingerprint == f.fingerprint
        g = f if g is None else g
        u = self.solution(f)
        v = u if same else self.extension(g)
        value = pairing_from_solutions(self.mesh, self._sigma, u, v, self.p, self.config.epsilon)
        result = Pairing(value, (self.p - 1.0) * f.log_scale + g.log_scale)
        if same:
            with self._lock:
                self._measurements[trace_id(f)] = Measurement(trace_id(f), value, result.log_scale)
        return result

    def cell_density(self, f: BoundaryTrace) -> np.ndarray:
        """Per-cell area * sigma * flux density of the solution for ``f``."""
        u = self.solution(f)
        return self.mesh.areas * self._sigma * flux_density(self.mesh, u, u, self.p, self.config.epsilon)

    def scaled(self, gamma: float) -> ScaledOracle:
        return ScaledOracle(self, gamma)

    def measurements(self) -> list[Measurement]:
        with self._lock:
            return sorted(self._measurements.values(), key=lambda m: m.trace_id)

    def clear_cache(self) -> None:
        with self._lock:
            self._cache.clear()
            self._extensions.clear()

    def __repr__(self) -> str:
        return f"DnOracle({self.name!r}, p={self.p:g}, solves={self.solves})"


class ScaledOracle(_Algebra):
    """gamma * Lambda for a constant gamma > 0, reusing the wrapped oracle's solves.

    A constant conductivity gamma has the same minimizers as 1 and exactly
    gamma times its pairings.
    """

    def __init__(self, base: DnOracle, gamma: float):
        if not gamma > 0:
            raise ConfigError(f"Constant conductivity gamma must be positive, got {gamma}.")
        self.base = base
        self.gamma = float(gamma)
        self.mesh = base.mesh

    @property
    def p(self) -> float:
        return self.base.p

    def pair(self, f: BoundaryTrace, g: BoundaryTrace | None = None) -> Pairing:
        value, log_scale = self.base.pair(f, g)
        return Pairing(self.gamma * value, log_scale)


class RegionOperator(_Algebra):
    """Lambda_B: background flux integrated over the cells of B only."""

    def __init__(self, reference: DnOracle, cells):
        cells = np.unique(np.asarray(cells, dtype=np.int64).ravel())
        if cells.size == 0:
            raise ConfigError("Test region B must contain at least one cell.")
        if not reference.is_background:
            raise ConfigError("Region operators need the background oracle (sigma = 1).")
        self.reference = reference
        self.cells = cells
        self.mesh = reference.mesh

    @property
    def p(self) -> float:
        return self.reference.p

    def pair(self, f: BoundaryTrace, g: BoundaryTrace | None = None) -> Pairing:
        g = f if g is None else g
        u = self.reference.solution(f)
        v = u if g.fingerprint == f.fingerprint else self.reference.solution(g)
        density = flux_density(self.mesh, u, v, self.p, self.reference.config.epsilon)
        value = float(self.mesh.areas[self.cells] @ density[self.cells])
        return Pairing(value, (self.p - 1.0) * f.log_scale + g.log_scale)


class ReplayOracle(_Algebra):
    """Answers self-pairings from recorded measurements without solving.

    Traces are matched by :func:`trace_id`.
    """

    def __init__(self, mesh: TriMesh, p: float, measurements: Iterable[Measurement]):
        self.mesh = mesh
        self.p = float(p)
        self._table = {m.trace_id: m for m in measurements}

    def pair(self, f: BoundaryTrace, g: BoundaryTrace | None = None) -> Pairing:
        if g is not None and g.fingerprint != f.fingerprint:
            raise ConfigError("A replayed oracle only answers self-pairings <Lambda(f), f>.")
        key = trace_id(f)
        try:
            m = self._table[key]
        except KeyError:
            raise ConfigError(
                f"No recorded measurement for trace {key!r}.\n\n"
                "  Replay with the dictionary and seed used when the dump was written."
            ) from None
        return Pairing(m.value, m.log_scale)


# ==========================================
# Expressions and comparisons
# ==========================================
@dataclass(frozen=True)
class PairingExpression:
    """A finite linear combination of pairing operators."""

    terms: tuple[tuple[float, Operator], ...] = ()

    @classmethod
    def of(cls, item) -> PairingExpression:
        if isinstance(item, PairingExpression):
            return item
        if isinstance(item, Operator):
            return cls(((1.0, item),))
        raise TypeError(f"Cannot combine {type(item).__name__} with a pairing operator.")

    def __add__(self, other) -> PairingExpression:
        return PairingExpression(self.terms + PairingExpression.of(other).terms)

    __radd__ = __add__

    def __sub__(self, other) -> PairingExpression:
        return self + PairingExpression.of(other) * -1.0

    def __rsub__(self, other) -> PairingExpression:
        return PairingExpression.of(other) - self

    def __mul__(self, factor: float) -> PairingExpression:
        return PairingExpression(tuple((c * float(factor), op) for c, op in self.terms))

    __rmul__ = __mul__

    def __neg__(self) -> PairingExpression:
        return self * -1.0

    def evaluate(self, f: BoundaryTrace) -> float:
        """<(expression)(f), f> on the stored values of ``f``.

        Every self-pairing of ``f`` carries the same log-scale p * log_scale(f),
        so the combination is taken on normalized values.
        """
        return float(sum(c * op.pair(f).value for c, op in self.terms))


@dataclass(frozen=True)
class PreorderVerdict:
    """Result of testing ``lhs >= rhs`` over a finite dictionary.

    ``consistent`` only means no dictionary trace violated the relation.
    ``gap`` is the smallest value of <(lhs - rhs) f, f> / scale(f).
    """

    status: Literal["consistent", "violated"]
    gap: float
    witness: str | None = None
    evaluated: int = 0
    gaps: tuple[float, ...] = field(default=(), repr=False)

    @property
    def consistent(self) -> bool:
        return self.status == "consistent"


def deficit(oracle_sigma: Operator, oracle_ref: Operator, f: BoundaryTrace) -> Pairing:
    """<(Lambda_sigma - Lambda_ref)(f), f> with one shared log-scale."""
    if oracle_sigma.mesh.mesh_id != oracle_ref.mesh.mesh_id:
        raise ConfigError(
            "Cannot compare oracles built on different meshes "
            f"({oracle_sigma.mesh.mesh_id} vs {oracle_ref.mesh.mesh_id})."
        )
    if oracle_sigma.p != oracle_ref.p:
        raise ConfigError(f"Cannot compare oracles with p = {oracle_sigma.p} and p = {oracle_ref.p}.")
    a = oracle_sigma.pair(f)
    b = oracle_ref.pair(f)
    return Pairing(a.value - b.value, a.log_scale)


def preorder_test(
    lhs,
    rhs,
    dictionary: Sequence[BoundaryTrace],
    margin: float = MARGIN,
    reference: Operator | None = None,
) -> PreorderVerdict:
    """Check ``lhs >= rhs`` on every trace of ``dictionary``.

    A trace violates the relation when <(lhs - rhs) f, f> < -margin * scale(f)
    with scale(f) = |<Lambda_1 f, f>| from ``reference`` (or 1 without one).
    Gaps inside the margin count as consistent.
    """
    if not dictionary:
        raise ConfigError("The trace dictionary is empty; build one with default_dictionary().")
    difference = PairingExpression.of(lhs) - rhs
    worst, witness, gaps = math.inf, None, []
    for f in dictionary:
        scale = abs(reference.pair(f).value) if reference is not None else 1.0
        gap = difference.evaluate(f) / scale if scale > 0 else 0.0
        gaps.append(gap)
        if gap < worst:
            worst, witness = gap, trace_id(f)
    status = "violated" if worst < -margin else "consistent"
    return PreorderVerdict(
        status=status,
        gap=float(worst),
        witness=witness if status == "violated" else None,
        evaluated=len(gaps),
        gaps=tuple(gaps),
    )


# ==========================================
# Dictionaries
# ==========================================
def dictionary_taus(mesh: TriMesh, multipliers: Sequence[float] = (2, 4, 8, 12, 16, 20)) -> np.ndarray:
    """Frequencies multiplier / diam, capped so that tau * h_max <= 1/2."""
    taus = np.asarray(multipliers, dtype=float) / mesh.domain.diameter
    return np.unique(np.minimum(taus, 0.5 / mesh.h_max))


def default_dictionary(
    mesh: TriMesh,
    wolff: WolffSolution,
    seed: int = 0,
    *,
    directions: int = 16,
    taus: Sequence[float] | None = None,
    offsets: int = 3,
    random_profiles: int = 10,
) -> list[BoundaryTrace]:
    """Wolff traces plus affine traces and seeded smooth random profiles.

    Wolff traces are sup-normalized, so the ``offsets`` copies of one
    (rho, tau) pair share stored values and differ only in log-scale.
    """
    taus = dictionary_taus(mesh) if taus is None else np.asarray(taus, dtype=float)
    traces: list[BoundaryTrace] = []
    for k in range(directions):
        angle = 2.0 * math.pi * k / directions
        rho = (math.cos(angle), math.sin(angle))
        top = mesh.domain.support(np.asarray(rho))
        width = mesh.domain.extent(np.asarray(rho))
        for j, tau in enumerate(taus):
            for i in range(offsets):
                t = top - width * (i + 1) / (offsets + 1)
                trace = boundary_trace(WolffField(wolff, rho, t, float(tau)), mesh)
                label = f"wolff-d{k:02d}-tau{j}-t{i}"
                traces.append(BoundaryTrace(trace.values, trace.mesh_id, trace.log_scale, label))

    pts = mesh.boundary_points()
    for name, values in (
        ("affine-x", pts[:, 0]),
        ("affine-y", pts[:, 1]),
        ("affine-xy", pts[:, 0] + pts[:, 1]),
    ):
        traces.append(BoundaryTrace(values, mesh.mesh_id, 0.0, name).normalized())

    rng = np.random.default_rng(seed)
    rel = pts - mesh.domain.centroid
    theta = np.arctan2(rel[:, 1], rel[:, 0])
    orders = np.arange(1, 6)
    for r in range(random_profiles):
        a, b = rng.standard_normal((2, len(orders)))
        values = (a * np.cos(np.outer(theta, orders)) + b * np.sin(np.outer(theta, orders))) / orders**2
        traces.append(BoundaryTrace(values.sum(axis=1), mesh.mesh_id, 0.0, f"random-{r:02d}").normalized())

    logger.debug("dictionary: %d traces on mesh %s", len(traces), mesh.mesh_id)
    return traces
