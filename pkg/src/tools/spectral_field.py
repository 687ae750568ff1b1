"""
Campos escalares de banda limitada no toro 2π-periódico.

O campo guarda as amplitudes de Fourier num cubo denso (2K+1)^d onde o índice
j corresponde à frequência j − K. A visão pública é o mapa esparso `coeffs`.
As funções de array (`resize`, `carrier_product`, ...) operam sobre os d
últimos eixos e aceitam eixos de lote à esquerda; o propagador e o Monte Carlo
usam essas funções diretamente.
"""

import math
from functools import lru_cache
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ProjectionNotPermitted
from ..models.grid_model import GridSpec, Parity, WaveVector, as_wavevector, sup_norm

# Tolerância relativa da verificação de realidade
REALITY_TOLERANCE = 1e-12


def _axes(dim: int) -> Tuple[int, ...]:
    return tuple(range(-dim, 0))


@lru_cache(maxsize=None)
def lattice(dim: int, radius: int) -> Tuple[np.ndarray, ...]:
    """Componentes inteiras z_j no cubo (2K+1)^d, indexação 'ij'."""
    axis = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    for g in grids:
        g.flags.writeable = False
    return tuple(grids)


@lru_cache(maxsize=None)
def squared_norm(dim: int, radius: int) -> np.ndarray:
    """|z|² no cubo (2K+1)^d."""
    out = sum(g.astype(float) ** 2 for g in lattice(dim, radius))
    out = np.asarray(out, dtype=float)
    out.flags.writeable = False
    return out


def cube_shape(dim: int, radius: int) -> Tuple[int, ...]:
    return (2 * radius + 1,) * dim


def resize(arr: np.ndarray, dim: int, in_radius: int, out_radius: int) -> np.ndarray:
    """Completa com zeros ou recorta os d últimos eixos para o raio pedido."""
    if out_radius == in_radius:
        return arr
    lead = arr.shape[: arr.ndim - dim]
    if out_radius > in_radius:
        pad = out_radius - in_radius
        width = [(0, 0)] * len(lead) + [(pad, pad)] * dim
        return np.pad(arr, width)
    cut = in_radius - out_radius
    window = (Ellipsis,) + (slice(cut, cut + 2 * out_radius + 1),) * dim
    return arr[window]


def carrier_product(
    arr: np.ndarray, dim: int, z: Sequence[int], parity: Parity, in_radius: int, out_radius: int
) -> np.ndarray:
    """Produto exato com cos(z·x) ou sin(z·x); modos fora de out_radius são descartados."""
    shift = tuple(int(c) for c in z)
    work = max(out_radius, in_radius + sup_norm(shift))
    padded = resize(arr, dim, in_radius, work)
    plus = np.roll(padded, shift, axis=_axes(dim))  # plus[w] = f[w − z]
    minus = np.roll(padded, tuple(-c for c in shift), axis=_axes(dim))  # minus[w] = f[w + z]
    if Parity(parity) is Parity.COS:
        product = 0.5 * (plus + minus)
    else:
        product = -0.5j * (plus - minus)
    return resize(product, dim, work, out_radius)


def derivative_multiplier(dim: int, radius: int, direction: Sequence[float]) -> np.ndarray:
    """Símbolo i(e·z) da derivada direcional e·∇."""
    z = lattice(dim, radius)
    return 1j * sum(float(e) * zj for e, zj in zip(direction, z))


def flip_conjugate(arr: np.ndarray, dim: int) -> np.ndarray:
    """c(z) ↦ conj(c(−z)) nos d últimos eixos."""
    return np.conj(np.flip(arr, axis=_axes(dim)))


def reality_defect(arr: np.ndarray, dim: int) -> float:
    return float(np.max(np.abs(arr - flip_conjugate(arr, dim)), initial=0.0))


class SpectralField:
    """Campo escalar real de banda limitada; imutável após a construção."""

    __slots__ = ("_data", "_dim", "_radius")

    def __init__(self, data: np.ndarray, dim: int, support_radius: int, check: bool = True):
        if dim < 2:
            raise ValueError("dim must satisfy d ≥ 2")
        if support_radius < 0:
            raise ValueError("support_radius must be nonnegative")
        array = np.array(data, dtype=complex)
        if array.shape != cube_shape(dim, support_radius):
            raise ValueError(
                f"coefficient cube has shape {array.shape}, expected {cube_shape(dim, support_radius)}"
            )
        if check:
            scale = max(1.0, float(np.max(np.abs(array), initial=0.0)))
            if reality_defect(array, dim) > REALITY_TOLERANCE * scale:
                raise ValueError("field violates the reality constraint coeff(−z) = conj(coeff(z))")
        array.flags.writeable = False
        self._data = array
        self._dim = dim
        self._radius = support_radius

    # Construtores
    @classmethod
    def zeros(cls, dim: int, support_radius: int = 0) -> "SpectralField":
        return cls(np.zeros(cube_shape(dim, support_radius), dtype=complex), dim, support_radius, check=False)

    @classmethod
    def constant(cls, dim: int, value: float, support_radius: int = 0) -> "SpectralField":
        data = np.zeros(cube_shape(dim, support_radius), dtype=complex)
        data[(support_radius,) * dim] = float(value)
        return cls(data, dim, support_radius, check=False)

    @classmethod
    def from_coeffs(
        cls, dim: int, coeffs: Mapping[Sequence[int], complex], support_radius: Optional[int] = None
    ) -> "SpectralField":
        keys = [as_wavevector(z, dim) for z in coeffs]
        radius = support_radius if support_radius is not None else max((sup_norm(z) for z in keys), default=0)
        data = np.zeros(cube_shape(dim, radius), dtype=complex)
        for z, value in zip(keys, coeffs.values()):
            if sup_norm(z) > radius:
                raise ValueError(f"wavevector {z} exceeds support_radius {radius}")
            data[tuple(c + radius for c in z)] += complex(value)
        return cls(data, dim, radius)

    @classmethod
    def from_mode(
        cls, z: Sequence[int], parity: Parity = Parity.COS, amplitude: float = 1.0
    ) -> "SpectralField":
        """amplitude·cos(z·x) ou amplitude·sin(z·x)."""
        dim = len(z)
        zz = as_wavevector(z, dim)
        neg = tuple(-c for c in zz)
        if not any(zz):
            value = amplitude if Parity(parity) is Parity.COS else 0.0
            return cls.constant(dim, value)
        if Parity(parity) is Parity.COS:
            return cls.from_coeffs(dim, {zz: 0.5 * amplitude, neg: 0.5 * amplitude})
        return cls.from_coeffs(dim, {zz: -0.5j * amplitude, neg: 0.5j * amplitude})

    # Acesso
    @property
    def dim(self) -> int:
        return self._dim

    @property
    def support_radius(self) -> int:
        return self._radius

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def coeffs(self) -> Dict[WaveVector, complex]:
        """Mapa esparso wavevector → amplitude (apenas entradas não nulas)."""
        out: Dict[WaveVector, complex] = {}
        for index in zip(*np.nonzero(self._data)):
            z = tuple(int(j) - self._radius for j in index)
            out[z] = complex(self._data[index])
        return out

    def coeff(self, z: Sequence[int]) -> complex:
        zz = as_wavevector(z, self._dim)
        if sup_norm(zz) > self._radius:
            return 0j
        return complex(self._data[tuple(c + self._radius for c in zz)])

    def effective_radius(self) -> int:
        nonzero = np.nonzero(self._data)
        if len(nonzero[0]) == 0:
            return 0
        return int(max(np.max(np.abs(idx - self._radius)) for idx in nonzero))

    def is_real(self, tolerance: float = REALITY_TOLERANCE) -> bool:
        scale = max(1.0, float(np.max(np.abs(self._data), initial=0.0)))
        return reality_defect(self._data, self._dim) <= tolerance * scale

    def with_radius(self, support_radius: int, allow_projection: bool = False) -> "SpectralField":
        if support_radius < self.effective_radius() and not allow_projection:
            raise ProjectionNotPermitted(
                f"cropping to radius {support_radius} would drop modes up to {self.effective_radius()}"
            )
        data = resize(self._data, self._dim, self._radius, support_radius)
        return SpectralField(data, self._dim, support_radius, check=False)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self._data)))

    def norm_sq(self) -> float:
        return inner_product(self, self)

    def grad_norm_sq(self) -> float:
        weights = squared_norm(self._dim, self._radius)
        return float((2.0 * math.pi) ** self._dim * np.sum(weights * np.abs(self._data) ** 2))

    def allclose(self, other: "SpectralField", rtol: float = 1e-12, atol: float = 1e-14) -> bool:
        _check_dims(self, other)
        radius = max(self._radius, other._radius)
        a = resize(self._data, self._dim, self._radius, radius)
        b = resize(other._data, other._dim, other._radius, radius)
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))

    # Aritmética linear
    def _combine(self, other: "SpectralField", sign: float) -> "SpectralField":
        _check_dims(self, other)
        radius = max(self._radius, other._radius)
        a = resize(self._data, self._dim, self._radius, radius)
        b = resize(other._data, other._dim, other._radius, radius)
        return SpectralField(a + sign * b, self._dim, radius, check=False)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return self._combine(other, 1.0)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return self._combine(other, -1.0)

    def __mul__(self, scalar: float) -> "SpectralField":
        if isinstance(scalar, complex) or np.iscomplexobj(scalar):
            raise TypeError("real fields only scale by real numbers")
        return SpectralField(self._data * float(scalar), self._dim, self._radius, check=False)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return self * -1.0

    def __repr__(self) -> str:
        return f"SpectralField(dim={self._dim}, support_radius={self._radius}, nonzero={np.count_nonzero(self._data)})"


def _check_dims(f: SpectralField, g: SpectralField) -> None:
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")


def inner_product(f: SpectralField, g: SpectralField) -> float:
    """(f, g) = (2π)^d Σ_z f(z)·conj(g(z))."""
    _check_dims(f, g)
    radius = min(f.support_radius, g.support_radius)
    a = resize(f.data, f.dim, f.support_radius, radius)
    b = resize(g.data, g.dim, g.support_radius, radius)
    return float(((2.0 * math.pi) ** f.dim * np.sum(a * np.conj(b))).real)


def gradient(f: SpectralField) -> Tuple[SpectralField, ...]:
    z = lattice(f.dim, f.support_radius)
    return tuple(SpectralField(1j * zj * f.data, f.dim, f.support_radius, check=False) for zj in z)


def divergence(v: Sequence[SpectralField]) -> SpectralField:
    if not v:
        raise ValueError("divergence needs at least one component")
    dim, radius = v[0].dim, v[0].support_radius
    if len(v) != dim:
        raise ValueError(f"vector field has {len(v)} components, expected {dim}")
    if any(c.dim != dim or c.support_radius != radius for c in v):
        raise ValueError("vector components must share dim and support_radius")
    z = lattice(dim, radius)
    total = sum(1j * zj * c.data for zj, c in zip(z, v))
    return SpectralField(total, dim, radius, check=False)


def heat_semigroup_apply(f: SpectralField, t: float, kappa: float) -> SpectralField:
    """T_t f: c(z) ↦ exp(−κ|z|²t)·c(z)."""
    if t < 0.0:
        raise ValueError(f"t={t} violates t ≥ 0")
    if kappa < 0.0:
        raise ValueError(f"kappa={kappa} violates kappa ≥ 0")
    factor = np.exp(-kappa * t * squared_norm(f.dim, f.support_radius))
    return SpectralField(factor * f.data, f.dim, f.support_radius, check=False)


def mode_multiply_shift(
    f: SpectralField,
    z: Sequence[int],
    parity: Parity,
    out_radius: int,
    grid: Optional[GridSpec] = None,
    allow_projection: bool = False,
) -> SpectralField:
    """f·cos(z·x) ou f·sin(z·x) exato no raio out_radius."""
    zz = as_wavevector(z, f.dim)
    if out_radius < 0:
        raise ValueError("out_radius must be nonnegative")
    if grid is not None:
        grid.check_radius(out_radius)
    needed = f.effective_radius() + sup_norm(zz)
    if out_radius < needed and not allow_projection:
        raise ProjectionNotPermitted(
            f"out_radius {out_radius} < support {f.effective_radius()} + |z|∞ {sup_norm(zz)}"
        )
    data = carrier_product(f.data, f.dim, zz, parity, f.support_radius, out_radius)
    return SpectralField(data, f.dim, out_radius, check=False)


def evaluate(f: SpectralField, points: np.ndarray) -> np.ndarray:
    """f(x) = Σ_z c(z)e^{iz·x} nos pontos dados (forma (n, d))."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.shape[1] != f.dim:
        raise ValueError(f"points must have {f.dim} columns")
    index = np.nonzero(f.data)
    if len(index[0]) == 0:
        return np.zeros(x.shape[0])
    waves = np.stack([idx - f.support_radius for idx in index], axis=1).astype(float)
    amplitudes = f.data[index]
    return (np.exp(1j * x @ waves.T) @ amplitudes).real
