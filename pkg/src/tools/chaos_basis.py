"""
Aparato de Cameron–Martin: base temporal em cossenos, polinômios de Hermite,
multi-índices em ordem graduada, ξ_α e reconstrução de w_k(t) a partir de ξ_ik.
"""

import itertools
import logging
import math
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ..models.chaos_model import Cell, GaussianSample, HermiteConvention, MultiIndex, TimeBasis

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Folga para instantes calculados em ponto flutuante
_TIME_SLACK = 1e-12


def _check_times(tb: TimeBasis, t: ArrayLike) -> np.ndarray:
    times = np.asarray(t, dtype=float)
    slack = _TIME_SLACK * tb.T
    if np.any(times < -slack) or np.any(times > tb.T + slack):
        raise ValueError(f"time outside [0, T={tb.T}]")
    return np.clip(times, 0.0, tb.T)


def _check_mode(tb: TimeBasis, i: int) -> None:
    if not 1 <= i <= tb.n_t:
        raise ValueError(f"time mode i={i} outside 1..{tb.n_t}")


def time_basis_eval(tb: TimeBasis, i: int, t: ArrayLike) -> ArrayLike:
    """m_1 = 1/√T; m_i = √(2/T)·cos(π(i−1)t/T) para i ≥ 2."""
    _check_mode(tb, i)
    times = _check_times(tb, t)
    if i == 1:
        value = np.full_like(times, 1.0 / math.sqrt(tb.T))
    else:
        value = math.sqrt(2.0 / tb.T) * np.cos(math.pi * (i - 1) * times / tb.T)
    return float(value) if value.ndim == 0 else value


def time_basis_values(tb: TimeBasis, t: ArrayLike) -> np.ndarray:
    """Matriz (n_t, *shape(t)) com m_i(t), i = 1..n_t."""
    times = _check_times(tb, t)
    return np.stack([np.asarray(time_basis_eval(tb, i, times)) for i in range(1, tb.n_t + 1)])


def time_basis_antiderivative(tb: TimeBasis, i: int, t: ArrayLike) -> ArrayLike:
    """∫₀ᵗ m_i(s) ds em forma fechada."""
    _check_mode(tb, i)
    times = _check_times(tb, t)
    if i == 1:
        value = times / math.sqrt(tb.T)
    else:
        value = (
            math.sqrt(2.0 / tb.T)
            * (tb.T / (math.pi * (i - 1)))
            * np.sin(math.pi * (i - 1) * times / tb.T)
        )
    return float(value) if np.ndim(value) == 0 else value


def time_basis_antiderivatives(tb: TimeBasis, t: ArrayLike) -> np.ndarray:
    times = _check_times(tb, t)
    return np.stack(
        [np.asarray(time_basis_antiderivative(tb, i, times)) for i in range(1, tb.n_t + 1)]
    )


def hermite_table(
    n_max: int, t: ArrayLike, convention: HermiteConvention = HermiteConvention.SIGNED
) -> np.ndarray:
    """H_0..H_{n_max} em t; forma (n_max+1, *shape(t))."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    x = np.asarray(t, dtype=float)
    sign = -1.0 if HermiteConvention(convention) is HermiteConvention.SIGNED else 1.0
    table = np.empty((n_max + 1,) + x.shape)
    table[0] = 1.0
    if n_max >= 1:
        table[1] = sign * x
    for n in range(1, n_max):
        table[n + 1] = sign * x * table[n] - n * table[n - 1]
    return table


def hermite_eval(
    n: int, t: ArrayLike, convention: HermiteConvention = HermiteConvention.SIGNED
) -> ArrayLike:
    """H_n(t) = e^{t²/2} dⁿ/dtⁿ e^{−t²/2} (signed) ou He_n(t) (probabilist)."""
    if n < 0:
        raise ValueError(f"Hermite degree n={n} must be nonnegative")
    value = hermite_table(n, t, convention)[n]
    return float(value) if np.ndim(value) == 0 else value


def chaos_cells(n_t: int, n_w: int) -> List[Cell]:
    """Células (i, k) em ordem crescente."""
    return [(i, k) for i in range(1, n_t + 1) for k in range(1, n_w + 1)]


def multiindex_count(n_t: int, n_w: int, N: int) -> int:
    return math.comb(n_t * n_w + N, N)


def enumerate_multiindices(n_t: int, n_w: int, N: int) -> List[MultiIndex]:
    """Todos os α com i ≤ n_t, k ≤ n_w e |α| ≤ N em ordem graduada."""
    if N < 0:
        raise ValueError(f"N={N} violates N ≥ 0")
    if n_t < 1 or n_w < 0:
        raise ValueError("enumeration needs n_t ≥ 1 and n_w ≥ 0")
    cells = chaos_cells(n_t, n_w)
    indices = []
    for order in range(N + 1):
        for combo in itertools.combinations_with_replacement(cells, order):
            indices.append(MultiIndex.from_cells(combo))
    return indices


def xi_alpha(
    alpha: MultiIndex,
    sample: GaussianSample,
    convention: HermiteConvention = HermiteConvention.SIGNED,
) -> float:
    """ξ_α = (1/√α!)·Π H_{α_ik}(ξ_ik)."""
    if not alpha.fits(sample.n_t, sample.n_w):
        raise ValueError(f"multi-index {alpha.label()} exceeds sample shape {sample.xi.shape}")
    value = 1.0
    for i, k, count in alpha.entries:
        value *= hermite_eval(count, sample.value(i, k), convention)
    return value / math.sqrt(alpha.factorial())


def xi_alpha_batch(
    alphas: Sequence[MultiIndex],
    xi: np.ndarray,
    convention: HermiteConvention = HermiteConvention.SIGNED,
) -> np.ndarray:
    """ξ_α para um lote de amostras xi (forma (S, n_t, n_w)); retorna (S, len(alphas))."""
    batch = np.asarray(xi, dtype=float)
    if batch.ndim == 2:
        batch = batch[None]
    n_t, n_w = batch.shape[1:]
    max_count = max((c for a in alphas for _, _, c in a.entries), default=0)
    table = hermite_table(max_count, batch, convention)
    out = np.ones((batch.shape[0], len(alphas)))
    for column, alpha in enumerate(alphas):
        if not alpha.fits(n_t, n_w):
            raise ValueError(f"multi-index {alpha.label()} exceeds sample shape {(n_t, n_w)}")
        for i, k, count in alpha.entries:
            out[:, column] *= table[count, :, i - 1, k - 1]
        out[:, column] /= math.sqrt(alpha.factorial())
    return out


def brownian_from_sample(sample: GaussianSample, k: int, t: ArrayLike, T: float = 1.0) -> ArrayLike:
    """w_k(t) = Σ_i ξ_ik ∫₀ᵗ m_i(s) ds."""
    if not 1 <= k <= sample.n_w:
        raise ValueError(f"noise index k={k} outside 1..{sample.n_w}")
    tb = TimeBasis(T=T, n_t=sample.n_t)
    value = np.tensordot(sample.xi[:, k - 1], time_basis_antiderivatives(tb, t), axes=1)
    return float(value) if np.ndim(value) == 0 else value


def brownian_increment_matrix(tb: TimeBasis, times: np.ndarray) -> np.ndarray:
    """U[j, i] = ∫_{t_j}^{t_{j+1}} m_i; forma (len(times)−1, n_t)."""
    antiderivatives = time_basis_antiderivatives(tb, times)
    return np.diff(antiderivatives, axis=1).T


class ChaosIndexSet:
    """Bloco {|α| ≤ N} por nível, com posições e tabelas de pais α⁻(i,k)."""

    def __init__(self, n_t: int, n_w: int, N: int):
        self.n_t = n_t
        self.n_w = n_w
        self.N = N
        self.logger = logging.getLogger(__name__)

        ordered = enumerate_multiindices(n_t, n_w, N)
        self.levels: List[List[MultiIndex]] = [[] for _ in range(N + 1)]
        for alpha in ordered:
            self.levels[alpha.order()].append(alpha)
        self._local: Dict[Tuple[Tuple[int, int, int], ...], int] = {}
        self._rank: Dict[Tuple[Tuple[int, int, int], ...], int] = {}
        for rank, alpha in enumerate(ordered):
            self._rank[alpha.entries] = rank
        for level in self.levels:
            for position, alpha in enumerate(level):
                self._local[alpha.entries] = position
        self._slots = [self._build_slots(n) for n in range(N + 1)]
        self.logger.debug(
            f"Chaos index set n_t={n_t} n_w={n_w} N={N}: {len(ordered)} multi-indices"
        )

    def __len__(self) -> int:
        return sum(len(level) for level in self.levels)

    def level_size(self, n: int) -> int:
        return len(self.levels[n])

    def all(self) -> List[MultiIndex]:
        return [alpha for level in self.levels for alpha in level]

    def rank(self, alpha: MultiIndex) -> int:
        """Posição de α na ordem graduada global."""
        try:
            return self._rank[alpha.entries]
        except KeyError:
            raise ValueError(f"multi-index {alpha.label()} is outside the block") from None

    def locate(self, alpha: MultiIndex) -> Tuple[int, int]:
        """(nível, posição dentro do nível)."""
        if alpha.entries not in self._local:
            raise ValueError(f"multi-index {alpha.label()} is outside the block")
        return alpha.order(), self._local[alpha.entries]

    def _build_slots(self, n: int) -> Dict[str, np.ndarray]:
        """Para cada α de nível n e cada célula distinta s: (pai, i, k, √α_ik), com peso 0 nas vagas."""
        size = len(self.levels[n])
        shape = (n, size)
        parent = np.zeros(shape, dtype=np.intp)
        time_mode = np.zeros(shape, dtype=np.intp)
        noise = np.zeros(shape, dtype=np.intp)
        weight = np.zeros(shape)
        for a, alpha in enumerate(self.levels[n]):
            for s, (i, k, count) in enumerate(alpha.entries):
                parent[s, a] = self._local[alpha.decrement(i, k).entries]
                time_mode[s, a] = i - 1
                noise[s, a] = k - 1
                weight[s, a] = math.sqrt(count)
        return {"parent": parent, "time_mode": time_mode, "noise": noise, "weight": weight}

    def slots(self, n: int) -> Dict[str, np.ndarray]:
        return self._slots[n]
