"""Term identification: differentiate, score each (derivative, term) pair by MI, rank."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .copula import DEFAULT_K, _check_k, empirical_copula, knn_entropy, rank_column
from .diffop import DerivativeMatrix, forward_difference
from .dynsys import StateTrajectory
from .errors import AlignmentError, ParameterError
from .terms import build_terms, evaluate_terms

log = logging.getLogger(__name__)

MIN_PERMUTATIONS = 20


@dataclass(frozen=True)
class PermutationConfig:
    B: int = 200
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if int(self.B) != self.B or self.B < 1:
            raise ParameterError(f"permutation count B must be a positive integer, got {self.B}")
        if not 0 < self.alpha < 1:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.alpha <= 0.05 and self.B < MIN_PERMUTATIONS:
            raise ParameterError(
                f"B = {self.B} cannot resolve p <= {self.alpha}; use B >= {MIN_PERMUTATIONS}"
            )


@dataclass(frozen=True)
class CEMatrix:
    """MI estimates, one row per derivative and one column per term.

    Pairs involving a constant column have no defined rank transform and hold
    NaN; ``degenerate`` marks them.
    """

    mi: np.ndarray
    derivative_names: tuple[str, ...]
    term_names: tuple[str, ...]
    k: int
    n_effective: int
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        mi = np.asarray(self.mi, dtype=float).reshape(len(self.derivative_names), len(self.term_names))
        deg = np.isnan(mi) if self.degenerate is None else np.asarray(self.degenerate, dtype=bool)
        if np.any(~np.isfinite(mi) & ~deg):
            raise ValueError("CE matrix has non-finite entries outside degenerate pairs")
        object.__setattr__(self, "mi", mi)
        object.__setattr__(self, "degenerate", deg)


@dataclass(frozen=True)
class RankedTerm:
    term: str
    mi_nats: float | None
    rank: int | None
    p_value: float | None = None


@dataclass
class IdentificationReport:
    rankings: dict[str, list[RankedTerm]]
    metadata: dict
    warnings: list[str] = field(default_factory=list)

    def top_terms(self, derivative, n):
        return [r.term for r in self.rankings[derivative][:n] if r.rank is not None]


def _is_constant(col):
    return col.size == 0 or bool(np.all(col == col[0]))


def _pair_mi(u, v, k):
    return -knn_entropy(np.column_stack([u, v]), k)


def score_terms(derivs: DerivativeMatrix, covariates, k=DEFAULT_K, term_names=None,
                n_jobs=1) -> CEMatrix:
    """MI of every (derivative column, covariate column) pair at a common ``k``."""
    values = derivs.values if isinstance(derivs, DerivativeMatrix) else np.asarray(derivs, dtype=float)
    names = derivs.var_names if isinstance(derivs, DerivativeMatrix) else tuple(
        f"d{i}" for i in range(values.shape[1]))
    cov = np.asarray(covariates, dtype=float)
    if cov.ndim == 1:
        cov = cov[:, None]
    if cov.shape[0] != values.shape[0]:
        raise AlignmentError(
            f"derivatives have {values.shape[0]} rows but covariates have {cov.shape[0]}"
        )
    n = values.shape[0]
    if term_names is None:
        term_names = tuple(f"c{j}" for j in range(cov.shape[1]))
    if len(term_names) != cov.shape[1]:
        raise AlignmentError(f"{len(term_names)} term names for {cov.shape[1]} covariate columns")
    if cov.shape[1]:
        k = _check_k(k, n)

    d_const = [_is_constant(values[:, i]) for i in range(values.shape[1])]
    c_const = [_is_constant(cov[:, j]) for j in range(cov.shape[1])]
    d_ranks = empirical_copula(values).values if n >= 2 else values
    c_ranks = empirical_copula(cov).values if n >= 2 and cov.shape[1] else cov

    pairs = [(i, j) for i in range(values.shape[1]) for j in range(cov.shape[1])
             if not (d_const[i] or c_const[j])]

    def task(pair):
        i, j = pair
        return _pair_mi(d_ranks[:, i], c_ranks[:, j], k)

    mi = np.full((values.shape[1], cov.shape[1]), np.nan)
    for (i, j), value in zip(pairs, _map(task, pairs, n_jobs)):
        mi[i, j] = value
    return CEMatrix(mi, tuple(names), tuple(term_names), int(k), n, np.isnan(mi))


def _map(fn, items, n_jobs):
    if n_jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=None if n_jobs in (-1, None) else n_jobs) as pool:
        return list(pool.map(fn, items))


def rank_terms(cem: CEMatrix):
    """Per-derivative term order by MI descending; ties keep library order."""
    out = {}
    for i, name in enumerate(cem.derivative_names):
        row = cem.mi[i]
        valid = [j for j in range(len(row)) if not cem.degenerate[i, j]]
        # stable sort on the negated value keeps library order among ties
        order = sorted(valid, key=lambda j: -row[j])
        ranked = [RankedTerm(cem.term_names[j], float(row[j]), r + 1) for r, j in enumerate(order)]
        ranked += [RankedTerm(cem.term_names[j], None, None) for j in range(len(row)) if cem.degenerate[i, j]]
        out[name] = ranked
    return out


def _pair_rng(seed, i, j):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(i), int(j))))


def permutation_null(deriv_col, cov_col, k=DEFAULT_K, pcfg: PermutationConfig | None = None,
                     rng=None, observed=None):
    """Permutation p-value ``(1 + #{b : MI_b >= MI_obs}) / (B + 1)``.

    ``cov_col`` is shuffled independently ``B`` times. Shuffling a column and
    then ranking it equals shuffling its ranks, so ranks are computed once.
    """
    pcfg = pcfg or PermutationConfig()
    u = np.asarray(deriv_col, dtype=float).ravel()
    v = np.asarray(cov_col, dtype=float).ravel()
    if u.shape != v.shape:
        raise AlignmentError(f"columns have {u.size} and {v.size} rows")
    n = u.size
    k = _check_k(k, n)
    ru = rank_column(u) / n
    rv = rank_column(v) / n
    if observed is None:
        observed = _pair_mi(ru, rv, k)
    rng = rng if rng is not None else np.random.default_rng(pcfg.seed)
    exceed = 0
    for _ in range(pcfg.B):
        if _pair_mi(ru, rv[rng.permutation(n)], k) >= observed:
            exceed += 1
    return (1 + exceed) / (pcfg.B + 1)


def identify(traj: StateTrajectory, terms_mode="paper", k=DEFAULT_K,
             permutation: PermutationConfig | None = None, metadata=None,
             n_jobs=1) -> IdentificationReport:
    """Run differentiate -> evaluate library -> score -> rank (-> p-values)."""
    if len(traj) < k + 2:
        raise ParameterError(f"trajectory has {len(traj)} samples; need at least k + 2 = {k + 2}")
    derivs = forward_difference(traj)
    terms = build_terms(traj.var_names, terms_mode)
    covariates = evaluate_terms(traj.states[:-1], terms)
    term_names = tuple(t.display for t in terms)
    cem = score_terms(derivs, covariates, k, term_names, n_jobs=n_jobs)
    rankings = rank_terms(cem)

    warnings = []
    for i, name in enumerate(cem.derivative_names):
        if _is_constant(derivs.values[:, i]):
            warnings.append(f"{name} is constant; its MI values are not applicable")
    for j, name in enumerate(term_names):
        if _is_constant(covariates[:, j]):
            warnings.append(f"term {name} is constant; its MI values are not applicable")
    for w in warnings:
        log.warning(w)

    if permutation is not None:
        jobs = [(i, j) for i in range(len(cem.derivative_names)) for j in range(len(term_names))
                if not cem.degenerate[i, j]]

        def task(pair):
            i, j = pair
            return permutation_null(derivs.values[:, i], covariates[:, j], k, permutation,
                                    rng=_pair_rng(permutation.seed, i, j),
                                    observed=cem.mi[i, j])

        pvals = dict(zip(jobs, _map(task, jobs, n_jobs)))
        term_index = {n: j for j, n in enumerate(term_names)}
        for i, name in enumerate(cem.derivative_names):
            rankings[name] = [
                RankedTerm(r.term, r.mi_nats, r.rank, pvals.get((i, term_index[r.term])))
                for r in rankings[name]
            ]

    meta = {
        "n_samples": len(traj),
        "n_effective": cem.n_effective,
        "dt": traj.dt,
        "var_names": list(traj.var_names),
        "terms_mode": terms_mode if isinstance(terms_mode, str) else ",".join(
            t.display if hasattr(t, "display") else str(t) for t in terms_mode),
        "terms": list(term_names),
        "k": cem.k,
        "units": "nats",
        "permutation": None if permutation is None else {
            "B": permutation.B, "alpha": permutation.alpha, "seed": permutation.seed},
    }
    meta.update(metadata or {})
    return IdentificationReport(rankings, meta, warnings)
