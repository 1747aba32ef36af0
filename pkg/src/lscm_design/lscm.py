"""Ground-truth LSCM simulation: model generation, perfect interventions,
the ideal ICA oracle and row recovery.

Noise distributions are never sampled. Non-Gaussian noise is what makes
ICA identify ``I - W`` up to row permutation and scaling; the oracle here
returns exactly that, so nothing downstream depends on noise draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph_core import DirectedGraph, format_matrix, parse_matrix

DEFAULT_WEIGHT_RANGE = (0.5, 2.0)
SINGULAR_TOL = 1e-8
MAX_RETRIES = 50
RATIO_RTOL = 1e-7


class SingularModelError(ValueError):
    """``I - W`` (or an interventional ``I - W^(i)``) is numerically singular."""


class RecoveryError(ValueError):
    """Row comparison did not single out exactly one observational row."""


def _rng(seed):
    return np.random.default_rng(seed)


def _check_invertible(m: np.ndarray, tol: float = SINGULAR_TOL) -> bool:
    return abs(np.linalg.det(m)) > tol


@dataclass(frozen=True)
class WeightMatrix:
    """Structural coefficients; ``w[i, j]`` is the weight of ``x_j`` in ``x_i``'s equation."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weight matrix must be square, got {w.shape}")
        if np.any(np.diag(w) != 0):
            raise ValueError("weight matrix must have a zero diagonal")
        if not _check_invertible(np.eye(w.shape[0]) - w):
            raise SingularModelError("I - W is singular")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def graph(self) -> DirectedGraph:
        return DirectedGraph((self.w != 0).astype(np.uint8))

    def i_minus_w(self) -> np.ndarray:
        return np.eye(self.n) - self.w

    def to_text(self) -> str:
        return format_matrix(self.w)

    @classmethod
    def from_text(cls, text: str) -> "WeightMatrix":
        return cls(parse_matrix(text).astype(np.float64))


@dataclass(frozen=True)
class IcaOutput:
    """What an ideal ICA run hands back: ``P D (I - W)``.

    Row ``k`` of ``m`` is a nonzero multiple of row ``perm[k]`` of ``I - W``.
    The permutation and scaling are hidden from the policy; tests reach them
    through :meth:`hidden`.
    """

    m: np.ndarray
    _perm: np.ndarray = field(repr=False, compare=False)
    _scale: np.ndarray = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.m.shape[0]

    @property
    def support(self) -> np.ndarray:
        return (self.m != 0).astype(np.uint8)

    def hidden(self) -> tuple[np.ndarray, np.ndarray]:
        """Test-only access to ``(perm, scale)``."""
        return self._perm.copy(), self._scale.copy()

    def row_of_variable(self, i: int) -> int:
        """Test-only: the row index holding variable ``i``'s equation."""
        return int(np.flatnonzero(self._perm == i)[0])


@dataclass(frozen=True)
class InterventionResult:
    target: int
    revealed_row: np.ndarray
    revealed_ica_row_index: int


def generate_er_model(
    n: int,
    edge_prob: float,
    weight_range=DEFAULT_WEIGHT_RANGE,
    rng_seed=None,
    *,
    acyclic: bool = False,
    max_retries: int = MAX_RETRIES,
) -> WeightMatrix:
    """Erdős–Rényi support with uniform-magnitude, random-sign weights.

    With ``acyclic=True`` only edges consistent with a random topological
    order are kept (same per-edge probability among those pairs).
    """
    if not 0 <= edge_prob <= 1:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    lo, hi = weight_range
    if not 0 < lo <= hi:
        raise ValueError(f"weight_range must exclude zero, got {weight_range}")
    rng = _rng(rng_seed)
    support = rng.random((n, n)) < edge_prob
    np.fill_diagonal(support, False)
    if acyclic:
        order = rng.permutation(n)
        rank = np.empty(n, dtype=np.int64)
        rank[order] = np.arange(n)
        # j -> i allowed only when j precedes i
        support &= rank[None, :] < rank[:, None]
    eye = np.eye(n)
    for _ in range(max_retries):
        mags = rng.uniform(lo, hi, size=(n, n))
        signs = rng.choice((-1.0, 1.0), size=(n, n))
        w = np.where(support, mags * signs, 0.0)
        if _check_invertible(eye - w):
            return WeightMatrix(w)
    raise SingularModelError(f"no invertible I - W after {max_retries} weight draws")


def _ica(i_minus_w: np.ndarray, rng, weight_range, perm, scale, perturbation) -> IcaOutput:
    n = i_minus_w.shape[0]
    if perm is None:
        perm = rng.permutation(n)
    if scale is None:
        lo, hi = weight_range
        scale = rng.uniform(lo, hi, size=n) * rng.choice((-1.0, 1.0), size=n)
    perm = np.asarray(perm, dtype=np.int64)
    scale = np.asarray(scale, dtype=np.float64)
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError("perm must be a permutation of range(n)")
    if np.any(scale == 0):
        raise ValueError("scale entries must be nonzero")
    m = scale[:, None] * i_minus_w[perm]
    if perturbation:
        nz = m != 0
        m = m + np.where(nz, rng.normal(0.0, perturbation, size=m.shape), 0.0)
    m.setflags(write=False)
    return IcaOutput(m=m, _perm=perm, _scale=scale)


def ica_oracle(
    w: WeightMatrix,
    rng_seed=None,
    *,
    weight_range=DEFAULT_WEIGHT_RANGE,
    perm=None,
    scale=None,
    perturbation: float = 0.0,
) -> IcaOutput:
    """Row-permuted, row-scaled copy of ``I - W``.

    ``perm`` and ``scale`` pin the hidden factors (test hook).
    ``perturbation`` adds Gaussian noise of that standard deviation to the
    nonzero entries; it is off by default.
    """
    return _ica(w.i_minus_w(), _rng(rng_seed), weight_range, perm, scale, perturbation)


def intervened_weights(w: WeightMatrix, i: int) -> np.ndarray:
    wi = np.array(w.w, copy=True)
    wi[i, :] = 0.0
    return wi


def intervene(
    w: WeightMatrix,
    i: int,
    rng_seed=None,
    *,
    weight_range=DEFAULT_WEIGHT_RANGE,
    perm=None,
    scale=None,
) -> IcaOutput:
    """Ideal ICA output of the model under ``do(x_i)`` (row ``i`` of ``W`` zeroed)."""
    if not 0 <= i < w.n:
        raise IndexError(f"variable {i} out of range for n={w.n}")
    imw = np.eye(w.n) - intervened_weights(w, i)
    if not _check_invertible(imw):
        raise SingularModelError(f"I - W^({i}) is singular")
    return _ica(imw, _rng(rng_seed), weight_range, perm, scale, 0.0)


def _normalise_rows(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale each row so its first nonzero entry is 1; also return supports."""
    supp = m != 0
    first = np.argmax(supp, axis=1)
    lead = m[np.arange(m.shape[0]), first]
    return m / lead[:, None], supp


def same_up_to_scale(a: np.ndarray, b: np.ndarray, rtol: float = RATIO_RTOL) -> np.ndarray:
    """Pairwise matrix: ``out[p, q]`` iff row ``p`` of ``a`` is a multiple of row ``q`` of ``b``.

    Rows match when their supports agree and the entry ratio is constant on
    that support to relative tolerance ``rtol``.
    """
    na, sa = _normalise_rows(np.asarray(a, dtype=np.float64))
    nb, sb = _normalise_rows(np.asarray(b, dtype=np.float64))
    same_supp = np.all(sa[:, None, :] == sb[None, :, :], axis=2)
    diff = np.abs(na[:, None, :] - nb[None, :, :])
    tol = rtol * np.maximum(np.abs(na[:, None, :]), np.abs(nb[None, :, :]))
    close = np.all(diff <= tol, axis=2)
    return same_supp & close


def recover_row(obs: IcaOutput, interv: IcaOutput, i: int, rtol: float = RATIO_RTOL) -> InterventionResult:
    """Recover row ``i`` of ``W`` from observational and ``do(x_i)`` ICA outputs.

    The observational row with no scalar multiple among the interventional
    rows is variable ``i``'s equation; rescaled so its ``i``-th entry is 1
    it equals row ``i`` of ``I - W``.
    """
    if obs.n != interv.n:
        raise ValueError("observational and interventional outputs differ in size")
    if not 0 <= i < obs.n:
        raise IndexError(f"variable {i} out of range for n={obs.n}")
    matched = same_up_to_scale(obs.m, interv.m, rtol).any(axis=1)
    orphans = np.flatnonzero(~matched)
    if len(orphans) == 0:
        # x_i had no parents, so do(x_i) leaves I - W unchanged; its row is
        # the unique one proportional to e_i
        unit = np.zeros(obs.n)
        unit[i] = 1.0
        orphans = np.flatnonzero(same_up_to_scale(obs.m, unit[None, :], rtol)[:, 0])
    if len(orphans) != 1:
        raise RecoveryError(
            f"expected exactly one observational row absent after do(x_{i}), found {len(orphans)}"
        )
    k = int(orphans[0])
    row = obs.m[k]
    if row[i] == 0:
        raise RecoveryError(f"row {k} has no entry at column {i}; cannot be x_{i}'s equation")
    w_row = -row / row[i]
    w_row[i] = 0.0
    return InterventionResult(target=i, revealed_row=w_row, revealed_ica_row_index=k)
