"""Markov chain constructions and exact finite-window laws.

Covers the count autoregression with binomial thinning and Poisson
innovations (built two ways: directly from its transition structure, and
as a superposition of independent pure-death chains), the pure-death
chains themselves, binary indicator-product chains, seeded path
simulation, and exact joint laws over arbitrary finite index windows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .dependence import JointPmf
from .errors import (
    ExplosionLimitError,
    InvalidConfigError,
    InvalidParameterError,
)
from .pmf import (
    DEFAULT_TAIL_BUDGET,
    Pmf,
    SeedSpec,
    _require_sampleable,
    _sample_with_rng,
    binomial_pmf,
    convolve,
    point_mass,
    poisson_pmf,
)

DEFAULT_EXPLOSION_LIMIT = 2_000_000

__all__ = [
    "InarParams",
    "MarkovChainSpec",
    "PathEnsemble",
    "InnovationDecomposition",
    "SuperpositionConfig",
    "TupleLaw",
    "inar_kernel",
    "iid_chain",
    "death_kernel",
    "binomial_death_chain",
    "poisson_death_chain",
    "indicator_chain_spec",
    "indicator_chain",
    "simulate_chain",
    "simulate_inar_direct",
    "simulate_inar_superposition",
    "window_joint_pmf",
    "marginal_at",
    "write_ensemble_csv",
]


@dataclass(frozen=True)
class InarParams:
    """Thinning/survival parameter ``a`` and innovation mean ``lam``."""

    a: float
    lam: float

    def __post_init__(self):
        if not (0.0 < self.a < 1.0):
            raise InvalidParameterError("a must lie in (0, 1)")
        if not (self.lam > 0.0) or not math.isfinite(self.lam):
            raise InvalidParameterError("lam must be positive and finite")

    @property
    def stationary_mean(self) -> float:
        return self.lam / (1.0 - self.a)


@dataclass(frozen=True)
class MarkovChainSpec:
    """Initial law plus one-step kernel (state -> Pmf) with a state cap.

    ``kernel(x)`` must be a valid Pmf for every ``x <= state_cap``; death
    kernels additionally never place mass above their input state.
    """

    initial: Pmf
    kernel: Callable[[int], Pmf]
    state_cap: int
    description: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.state_cap < 0:
            raise InvalidParameterError("state_cap must be nonnegative")


@dataclass(frozen=True)
class PathEnsemble:
    """Matrix of simulated paths, one row per path, plus its provenance.

    Regenerating with the same seed and parameters reproduces the matrix
    exactly.
    """

    paths: np.ndarray
    seed: SeedSpec
    params: Mapping

    def __post_init__(self):
        paths = np.ascontiguousarray(self.paths, dtype=np.int64)
        if paths.ndim != 2:
            raise InvalidParameterError("paths must be a 2-D matrix")
        paths.setflags(write=False)
        object.__setattr__(self, "paths", paths)

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    @property
    def length(self) -> int:
        return self.paths.shape[1]


@dataclass(frozen=True)
class InnovationDecomposition:
    """Aligned paths of the count, survivor, and innovation components.

    Enforces ``x[k] == u[k] + v[k]`` everywhere and ``u[k] <= x[k-1]``
    wherever the previous index exists (survivors cannot exceed their
    source).
    """

    x: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        x, u, v = (np.ascontiguousarray(m, dtype=np.int64) for m in (self.x, self.u, self.v))
        if not (x.shape == u.shape == v.shape) or x.ndim != 2:
            raise InvalidParameterError("x, u, v must share a 2-D shape")
        if not np.array_equal(x, u + v):
            raise InvalidParameterError("decomposition identity x = u + v violated")
        if x.shape[1] > 1 and np.any(u[:, 1:] > x[:, :-1]):
            raise InvalidParameterError("survivors exceed their source count")
        for m in (x, u, v):
            m.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class SuperpositionConfig:
    """Truncation depth for the death-chain superposition.

    ``depth`` truncates the age sum; the neglected chains contribute mean
    mass ``lam * a**depth / (1 - a)``, which must stay at or below
    ``tail_budget``.  ``warmup`` is the number of pre-window chain starts
    (defaults to ``depth``, which is exactly enough: older chains only
    contribute beyond the truncated age).
    """

    depth: int
    tail_budget: float = 1e-9
    warmup: int | None = None

    def __post_init__(self):
        if self.depth < 1:
            raise InvalidConfigError("depth must be a positive integer")
        if not (0.0 < self.tail_budget < 1.0):
            raise InvalidConfigError("tail_budget must lie in (0, 1)")
        if self.warmup is not None and self.warmup < self.depth:
            raise InvalidConfigError(
                "warmup below depth would drop chains that still contribute"
            )

    @property
    def effective_warmup(self) -> int:
        return self.depth if self.warmup is None else self.warmup

    def neglected_mean(self, params: InarParams) -> float:
        return params.lam * params.a**self.depth / (1.0 - params.a)

    def validate_for(self, params: InarParams) -> None:
        neglected = self.neglected_mean(params)
        if neglected > self.tail_budget:
            raise InvalidConfigError(
                f"depth {self.depth} leaves neglected mean mass {neglected:.3e} "
                f"above the budget {self.tail_budget:.3e}"
            )

    @classmethod
    def for_budget(cls, params: InarParams, tail_budget: float = 1e-9) -> "SuperpositionConfig":
        """Smallest depth meeting the neglected-mean budget."""
        if not (0.0 < tail_budget < 1.0):
            raise InvalidConfigError("tail_budget must lie in (0, 1)")
        target = tail_budget * (1.0 - params.a) / params.lam
        depth = max(1, math.ceil(math.log(target) / math.log(params.a)))
        while params.lam * params.a**depth / (1.0 - params.a) > tail_budget:
            depth += 1
        return cls(depth=depth, tail_budget=tail_budget)


def inar_kernel(
    params: InarParams, tail_budget: float = DEFAULT_TAIL_BUDGET
) -> MarkovChainSpec:
    """Stationary count-autoregression chain.

    One step from state x: thin the x survivors at rate a, then add an
    independent Poisson(lam) innovation.  The initial law is the stationary
    Poisson(lam / (1 - a)); the state cap is its truncation point.
    """
    innovation = poisson_pmf(params.lam, tail_budget)
    initial = poisson_pmf(params.stationary_mean, tail_budget)

    @lru_cache(maxsize=None)
    def kernel(x: int) -> Pmf:
        return convolve(binomial_pmf(x, params.a), innovation)

    return MarkovChainSpec(
        initial=initial,
        kernel=kernel,
        state_cap=initial.max_state,
        description={"construction": "inar", "a": params.a, "lambda": params.lam},
    )


def iid_chain(lam: float, tail_budget: float = DEFAULT_TAIL_BUDGET) -> MarkovChainSpec:
    """Kernel that ignores its state: an i.i.d. Poisson sequence (null model)."""
    law = poisson_pmf(lam, tail_budget)
    return MarkovChainSpec(
        initial=law,
        kernel=lambda x: law,
        state_cap=law.max_state,
        description={"construction": "iid", "lambda": lam},
    )


def death_kernel(a: float) -> Callable[[int], Pmf]:
    """Pure-death step: Binomial(y, a) from state y, so support never grows."""
    if not (0.0 < a < 1.0):
        raise InvalidParameterError("a must lie in (0, 1)")

    @lru_cache(maxsize=None)
    def kernel(y: int) -> Pmf:
        return binomial_pmf(y, a)

    return kernel


def binomial_death_chain(n: int, p: float, a: float) -> MarkovChainSpec:
    """Pure-death chain started from Binomial(n, p); trajectories never rise."""
    if n < 1 or int(n) != n:
        raise InvalidParameterError("n must be a positive integer")
    if not (0.0 < p < 1.0):
        raise InvalidParameterError("p must lie in (0, 1)")
    return MarkovChainSpec(
        initial=binomial_pmf(int(n), p),
        kernel=death_kernel(a),
        state_cap=int(n),
        description={"construction": "death-binomial", "n": int(n), "p": p, "a": a},
    )


def poisson_death_chain(
    lam: float, a: float, tail_budget: float = DEFAULT_TAIL_BUDGET
) -> MarkovChainSpec:
    """Pure-death chain started from Poisson(lam)."""
    initial = poisson_pmf(lam, tail_budget)
    return MarkovChainSpec(
        initial=initial,
        kernel=death_kernel(a),
        state_cap=initial.max_state,
        description={"construction": "death-poisson", "lambda": lam, "a": a},
    )


def indicator_chain_spec(p0: float, a: float) -> MarkovChainSpec:
    """Binary chain: start Bernoulli(p0), survive each step with probability a.

    This is the exact-law counterpart of :func:`indicator_chain`; the state 0
    is absorbing.
    """
    if not (0.0 <= p0 <= 1.0):
        raise InvalidParameterError("p0 must lie in [0, 1]")
    return MarkovChainSpec(
        initial=Pmf(np.array([1.0 - p0, p0])),
        kernel=death_kernel(a),
        state_cap=1,
        description={"construction": "indicator", "p0": p0, "a": a},
    )


def indicator_chain(
    p0: float, a: float, length: int, n_paths: int, seed: SeedSpec
) -> PathEnsemble:
    """Simulated indicator-product paths: z_k = z_0 * prod of Bernoulli(a) flags.

    Paths are {0,1}-valued and nonincreasing.
    """
    if not (0.0 <= p0 <= 1.0):
        raise InvalidParameterError("p0 must lie in [0, 1]")
    if not (0.0 < a < 1.0):
        raise InvalidParameterError("a must lie in (0, 1)")
    if length < 1 or n_paths < 1:
        raise InvalidParameterError("length and n_paths must be positive")
    rng = seed.generator()
    paths = np.empty((n_paths, length), dtype=np.int64)
    paths[:, 0] = rng.random(n_paths) < p0
    for k in range(1, length):
        paths[:, k] = paths[:, k - 1] & (rng.random(n_paths) < a)
    return PathEnsemble(
        paths, seed, {"construction": "indicator", "p0": p0, "a": a}
    )


def simulate_chain(
    spec: MarkovChainSpec,
    length: int,
    n_paths: int,
    seed: SeedSpec,
    tail_threshold: float = DEFAULT_TAIL_BUDGET,
) -> PathEnsemble:
    """I.i.d. paths of a chain via tabulated inverse-CDF sampling.

    Deterministic given the seed: states are visited in ascending order at
    every step, so the stream consumption pattern is reproducible.  Refuses
    to sample any pmf whose tail mass exceeds the threshold.
    """
    if length < 1 or n_paths < 1:
        raise InvalidParameterError("length and n_paths must be positive")
    rng = seed.generator()
    _require_sampleable(spec.initial, tail_threshold)
    paths = np.empty((n_paths, length), dtype=np.int64)
    paths[:, 0] = _sample_with_rng(spec.initial, rng, n_paths)
    for k in range(1, length):
        prev = paths[:, k - 1]
        cur = np.empty(n_paths, dtype=np.int64)
        for s in np.unique(prev):
            law = spec.kernel(int(s))
            _require_sampleable(law, tail_threshold)
            mask = prev == s
            cur[mask] = _sample_with_rng(law, rng, int(mask.sum()))
        paths[:, k] = cur
    return PathEnsemble(
        paths, seed, dict(spec.description, length=length, n_paths=n_paths)
    )


def simulate_inar_direct(
    params: InarParams, length: int, n_paths: int, seed: SeedSpec
) -> tuple[PathEnsemble, InnovationDecomposition]:
    """Simulate the chain from its transition structure.

    The pre-window state is drawn from the stationary law, then each step
    draws survivors Binomial(previous, a) and an independent Poisson(lam)
    innovation, so the decomposition identities hold by construction.
    """
    if length < 1 or n_paths < 1:
        raise InvalidParameterError("length and n_paths must be positive")
    rng = seed.generator()
    x_prev = rng.poisson(params.stationary_mean, n_paths)
    x = np.empty((n_paths, length), dtype=np.int64)
    u = np.empty_like(x)
    v = np.empty_like(x)
    for k in range(length):
        u[:, k] = rng.binomial(x_prev, params.a)
        v[:, k] = rng.poisson(params.lam, n_paths)
        x[:, k] = u[:, k] + v[:, k]
        x_prev = x[:, k]
    ensemble = PathEnsemble(
        x,
        seed,
        {
            "construction": "direct",
            "a": params.a,
            "lambda": params.lam,
            "length": length,
            "n_paths": n_paths,
        },
    )
    return ensemble, InnovationDecomposition(x, u, v)


def simulate_inar_superposition(
    params: InarParams,
    config: SuperpositionConfig,
    length: int,
    n_paths: int,
    seed: SeedSpec,
) -> tuple[PathEnsemble, InnovationDecomposition]:
    """Simulate the chain as a sum of independent pure-death chains.

    A fresh Poisson(lam)-started death chain begins at every time index;
    the observed count at k sums the current sizes of the last ``depth``
    generations.  The innovation is the newborn generation and the
    survivor part is everything older, so x = u + v exactly even under
    truncation.
    """
    if length < 1 or n_paths < 1:
        raise InvalidParameterError("length and n_paths must be positive")
    config.validate_for(params)
    depth = config.depth
    rng = seed.generator()
    x = np.zeros((n_paths, length), dtype=np.int64)
    u = np.zeros_like(x)
    v = np.zeros_like(x)
    for start in range(-config.effective_warmup, length):
        y = rng.poisson(params.lam, n_paths)
        j_max = min(depth, length - 1 - start)
        for j in range(j_max + 1):
            k = start + j
            if 0 <= k < length:
                x[:, k] += y
                if j == 0:
                    v[:, k] = y
                else:
                    u[:, k] += y
            if j < j_max:
                if not y.any():
                    break  # generation extinct: all later contributions are zero
                y = rng.binomial(y, params.a)
    ensemble = PathEnsemble(
        x,
        seed,
        {
            "construction": "superposition",
            "a": params.a,
            "lambda": params.lam,
            "depth": depth,
            "length": length,
            "n_paths": n_paths,
        },
    )
    return ensemble, InnovationDecomposition(x, u, v)


def _truncated_transition(
    spec: MarkovChainSpec, support: int
) -> tuple[np.ndarray, np.ndarray]:
    """Row-substochastic transition table on {0..support-1} plus per-row escape.

    The kernel must be evaluable up to ``support - 1``; all built-in chains
    define it for every nonnegative state, so a caller-supplied cap may
    exceed the chain's advertised ``state_cap`` to refine the truncation.
    """
    trans = np.zeros((support, support))
    escape = np.zeros(support)
    for s in range(support):
        law = spec.kernel(s)
        m = min(law.probs.size, support)
        trans[s, :m] = law.probs[:m]
        escape[s] = max(0.0, 1.0 - math.fsum(trans[s].tolist()))
    return trans, escape


@dataclass(frozen=True)
class TupleLaw:
    """Exact joint law of a chain observed at a finite set of indices.

    Atoms map observation tuples (one state per index, in index order) to
    probabilities; ``truncation_error`` bounds the mass lost to state
    truncation and kernel tails along the way.
    """

    indices: tuple[int, ...]
    atoms: Mapping[tuple[int, ...], float]
    truncation_error: float

    def total(self) -> float:
        return math.fsum(self.atoms.values())

    def marginal(self, index: int) -> Pmf:
        """Single-coordinate marginal as a Pmf (lost mass goes to the tail)."""
        pos = self.indices.index(index)
        top = max(atom[pos] for atom in self.atoms)
        probs = np.zeros(top + 1)
        for atom, mass in self.atoms.items():
            probs[atom[pos]] += mass
        return Pmf(probs, max(0.0, 1.0 - math.fsum(probs.tolist())))

    def split(
        self, s_indices: Sequence[int], t_indices: Sequence[int]
    ) -> JointPmf:
        """Bivariate law of (tuple over S, tuple over T), renormalized.

        S and T must be disjoint nonempty subsets of the observed indices;
        the kept mass is renormalized to 1 so the result is a valid joint
        (the discarded mass is already reported as truncation_error).
        """
        s_pos = [self.indices.index(i) for i in sorted(s_indices)]
        t_pos = [self.indices.index(i) for i in sorted(t_indices)]
        if not s_pos or not t_pos or set(s_pos) & set(t_pos):
            raise InvalidParameterError("S and T must be disjoint and nonempty")
        grouped: dict[tuple, dict[tuple, float]] = {}
        for atom, mass in self.atoms.items():
            r = tuple(atom[p] for p in s_pos)
            c = tuple(atom[p] for p in t_pos)
            by_col = grouped.setdefault(r, {})
            by_col[c] = by_col.get(c, 0.0) + mass
        rows = sorted(grouped)
        cols = sorted({c for by_col in grouped.values() for c in by_col})
        col_at = {c: j for j, c in enumerate(cols)}
        mass = np.zeros((len(rows), len(cols)))
        for i, r in enumerate(rows):
            for c, m in grouped[r].items():
                mass[i, col_at[c]] = m
        mass /= mass.sum()
        return JointPmf(mass, tuple(rows), tuple(cols))


def window_joint_pmf(
    spec: MarkovChainSpec,
    indices: Sequence[int],
    cap: int,
    explosion_limit: int = DEFAULT_EXPLOSION_LIMIT,
) -> TupleLaw:
    """Exact joint law of the chain at the given strictly increasing indices.

    Forward kernel products with per-coordinate truncation at ``cap``
    (``spec.state_cap`` is the natural choice; larger caps refine the
    truncation when the kernel extends).  Atoms are kept sparsely, so
    impossible tuples (e.g. increases under a death kernel) never
    materialize.  The accumulated lost mass is reported, not renormalized
    away.
    """
    idx = [int(i) for i in indices]
    if not idx or any(b <= a for a, b in zip(idx, idx[1:])) or idx[0] < 0:
        raise InvalidParameterError(
            "indices must be nonempty, nonnegative, strictly increasing"
        )
    if cap < 0:
        raise InvalidParameterError("cap must be nonnegative")
    support = cap + 1
    if support ** len(idx) > explosion_limit:
        raise ExplosionLimitError(
            f"window law could hold up to {support ** len(idx)} atoms "
            f"(limit {explosion_limit}); shrink the window or the cap"
        )
    trans, escape = _truncated_transition(spec, support)

    init = np.zeros(support)
    m = min(spec.initial.probs.size, support)
    init[:m] = spec.initial.probs[:m]
    err = 1.0 - math.fsum(init.tolist())

    index_set = set(idx)
    last = idx[-1]
    tuples: list[tuple[int, ...]] = [()]
    mat = init[None, :]
    atoms: dict[tuple[int, ...], float] = {}
    for t in range(last + 1):
        if t in index_set:
            if t == last:
                for row, tup in enumerate(tuples):
                    vec = mat[row]
                    for s in np.nonzero(vec > 0.0)[0]:
                        atoms[tup + (int(s),)] = float(vec[s])
                break
            new_tuples: list[tuple[int, ...]] = []
            rows: list[np.ndarray] = []
            for row, tup in enumerate(tuples):
                vec = mat[row]
                for s in np.nonzero(vec > 0.0)[0]:
                    unit = np.zeros(support)
                    unit[s] = vec[s]
                    new_tuples.append(tup + (int(s),))
                    rows.append(unit)
            tuples = new_tuples
            mat = np.vstack(rows)
        err += float((mat * escape).sum())
        mat = mat @ trans
    return TupleLaw(tuple(idx), atoms, max(0.0, err))


def marginal_at(spec: MarkovChainSpec, j: int) -> Pmf:
    """Initial law pushed through the kernel j times.

    Support grows freely up to the output of each kernel row; input states
    above the chain's cap escape into the tail, so the result's tail mass
    is an honest bound on everything unaccounted for.
    """
    if j < 0:
        raise InvalidParameterError("j must be nonnegative")
    cur = spec.initial
    for _ in range(j):
        cur = _push_once(cur, spec.kernel, spec.state_cap)
    return cur


def _push_once(pmf: Pmf, kernel: Callable[[int], Pmf], cap: int) -> Pmf:
    top = min(pmf.max_state, cap)
    laws = [kernel(x) for x in range(top + 1)]
    out = np.zeros(max(law.probs.size for law in laws))
    for x, law in enumerate(laws):
        px = pmf.probs[x]
        if px > 0.0:
            out[: law.probs.size] += px * law.probs
    return Pmf(out, max(0.0, 1.0 - math.fsum(out.tolist())))


def write_ensemble_csv(ensemble: PathEnsemble, path) -> None:
    """One row per path with `#`-prefixed metadata lines, then a header row."""
    meta = {k: v for k, v in ensemble.params.items()}
    lines = [
        f"# construction={meta.pop('construction', 'unknown')}",
        f"# params={json.dumps(meta, sort_keys=True)}",
        f"# root_seed={ensemble.seed.root_seed} stream_index={ensemble.seed.stream_index}",
        f"# n_paths={ensemble.n_paths} length={ensemble.length}",
        ",".join(f"t{k}" for k in range(ensemble.length)),
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
        for row in ensemble.paths:
            fh.write(",".join(map(str, row.tolist())))
            fh.write("\n")
