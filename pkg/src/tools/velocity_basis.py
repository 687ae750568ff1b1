import itertools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ProjectionNotPermitted, UnsupportedRegimeError
from ..models.grid_model import GridSpec, Parity, WaveVector, sup_norm
from ..models.velocity_model import CovarianceSpec, VelocityBasis, VelocityMode
from .spectral_field import SpectralField, carrier_product, lattice

logger = logging.getLogger(__name__)


def spectral_density(spec: CovarianceSpec, z: Sequence[float]) -> np.ndarray:
    """Ĉ(z) = A₀(1+|z|²)^{−(d+α)/2}[a·ẑẑᵀ + b/(d−1)·(I − ẑẑᵀ)]."""
    vec = np.asarray(z, dtype=float)
    if vec.shape != (spec.dim,):
        raise ValueError(f"z must have {spec.dim} components")
    z_sq = float(vec @ vec)
    if z_sq == 0.0:
        raise ValueError("spectral density is undefined at z = 0")
    projector = np.outer(vec, vec) / z_sq
    radial = spec.radial_factor(z_sq)
    return radial * (spec.a * projector + spec.b / (spec.dim - 1) * (np.eye(spec.dim) - projector))


def half_lattice(dim: int, shell_radius: int) -> List[WaveVector]:
    """z ≠ 0 com |z|∞ ≤ R e primeira componente não nula positiva, em ordem (|z|², lex decrescente)."""
    axis = range(-shell_radius, shell_radius + 1)
    vectors = []
    for z in itertools.product(axis, repeat=dim):
        first = next((c for c in z if c != 0), 0)
        if first > 0:
            vectors.append(tuple(z))
    return sorted(vectors, key=lambda z: (sum(c * c for c in z), tuple(-c for c in z)))


def polarizations(z: Sequence[int]) -> List[np.ndarray]:
    """(d−1) vetores unitários ortonormais e ortogonais a z."""
    vec = np.asarray(z, dtype=float)
    dim = vec.size
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValueError("polarizations need z ≠ 0")
    if dim == 2:
        return [np.array([-vec[1], vec[0]]) / norm]
    # descarta o eixo mais paralelo a z (empate: menor índice)
    dropped = int(np.argmax(np.abs(vec)))
    frame = [vec / norm]
    for axis in range(dim):
        if axis == dropped:
            continue
        e = np.zeros(dim)
        e[axis] = 1.0
        for _ in range(2):
            for q in frame:
                e = e - (q @ e) * q
        frame.append(e / np.linalg.norm(e))
    return frame[1:]


def build_divergence_free_basis(spec: CovarianceSpec, shell_radius: int) -> VelocityBasis:
    if not spec.is_divergence_free:
        raise UnsupportedRegimeError(
            f"no velocity basis is built for a={spec.a} > 0; only the divergence-free regime a = 0 is supported"
        )
    if shell_radius < 1:
        raise ValueError(f"shell_radius={shell_radius} violates shell_radius ≥ 1")

    modes = []
    for z in half_lattice(spec.dim, shell_radius):
        amplitude = math.sqrt(2.0 * spec.solenoidal_density(float(sum(c * c for c in z))))
        for e in polarizations(z):
            for parity in (Parity.COS, Parity.SIN):
                modes.append(
                    VelocityMode(
                        wavevector=z,
                        polarization=tuple(float(c) for c in e),
                        amplitude=amplitude,
                        parity=parity,
                    )
                )
    logger.debug(f"Built divergence-free basis: d={spec.dim}, R={shell_radius}, {len(modes)} modes")
    return VelocityBasis(spec=spec, modes=tuple(modes), shell_radius=shell_radius)


def covariance_at_zero(basis: VelocityBasis) -> Tuple[np.ndarray, float]:
    """C(0) = Σ_k ½ s_k² e_k e_kᵀ e c₀ = tr C(0) / d."""
    matrix = np.zeros((basis.dim, basis.dim))
    for mode in basis.modes:
        e = np.asarray(mode.polarization)
        matrix += 0.5 * mode.amplitude**2 * np.outer(e, e)
    return matrix, float(np.trace(matrix)) / basis.dim


def mode_values(basis: VelocityBasis, points: np.ndarray) -> np.ndarray:
    """σ_k(x) nos pontos dados; forma (n_modes, n_points, d)."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.shape[1] != basis.dim:
        raise ValueError(f"points must have {basis.dim} columns")
    out = np.zeros((basis.n_modes, x.shape[0], basis.dim))
    for k, mode in enumerate(basis.modes):
        phase = x @ np.asarray(mode.wavevector, dtype=float)
        carrier = np.cos(phase) if mode.parity is Parity.COS else np.sin(phase)
        out[k] = mode.amplitude * carrier[:, None] * np.asarray(mode.polarization)[None, :]
    return out


def kernel_sum(basis: VelocityBasis, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Σ_k σ_k(x)σ_k(y)ᵀ para pares (x, y); forma (n, d, d)."""
    sx = mode_values(basis, x)
    sy = mode_values(basis, y)
    return np.einsum("kni,knj->nij", sx, sy)


def truncated_covariance(spec: CovarianceSpec, shell_radius: int, r: np.ndarray) -> np.ndarray:
    """Σ_{0<|z|∞≤R} Ĉ(z)e^{iz·r} sobre o reticulado completo; forma (n, d, d)."""
    rr = np.atleast_2d(np.asarray(r, dtype=float))
    axis = range(-shell_radius, shell_radius + 1)
    out = np.zeros((rr.shape[0], spec.dim, spec.dim), dtype=complex)
    for z in itertools.product(axis, repeat=spec.dim):
        if not any(z):
            continue
        phase = np.exp(1j * rr @ np.asarray(z, dtype=float))
        out += phase[:, None, None] * spectral_density(spec, z)[None, :, :]
    return out.real


class AdvectionOperator:
    """Aplica M_k = σ_k·∇ a cubos de coeficientes com multiplicadores em cache."""

    def __init__(self, basis: VelocityBasis, grid: Optional[GridSpec] = None):
        self.basis = basis
        self.grid = grid
        self.logger = logging.getLogger(__name__)
        self._multipliers: Dict[Tuple[int, int], np.ndarray] = {}

    def multiplier(self, k: int, radius: int) -> np.ndarray:
        """s_k·i(e_k·z) no cubo de raio dado."""
        key = (k, radius)
        if key not in self._multipliers:
            mode = self.basis.modes[k]
            z = lattice(self.basis.dim, radius)
            symbol = 1j * mode.amplitude * sum(e * zj for e, zj in zip(mode.polarization, z))
            symbol.flags.writeable = False
            self._multipliers[key] = symbol
        return self._multipliers[key]

    def apply_array(self, k: int, arr: np.ndarray, in_radius: int, out_radius: int) -> np.ndarray:
        if self.grid is not None:
            self.grid.check_radius(out_radius)
        mode = self.basis.modes[k]
        directional = self.multiplier(k, in_radius) * arr
        return carrier_product(directional, self.basis.dim, mode.wavevector, mode.parity, in_radius, out_radius)


def apply_Mk(
    basis: VelocityBasis,
    k: int,
    f: SpectralField,
    out_radius: Optional[int] = None,
    grid: Optional[GridSpec] = None,
    allow_projection: bool = False,
) -> SpectralField:
    """M_k f = s_k·(e_k·∇f)·{cos|sin}(z_k·x); k é a posição do modo na base (0-based)."""
    if not 0 <= k < basis.n_modes:
        raise ValueError(f"mode index {k} outside 0..{basis.n_modes - 1}")
    mode = basis.modes[k]
    radius = f.support_radius + mode.reach if out_radius is None else out_radius
    needed = f.effective_radius() + sup_norm(mode.wavevector)
    if radius < needed and not allow_projection:
        raise ProjectionNotPermitted(f"out_radius {radius} < {needed} needed by mode {k}")
    operator = AdvectionOperator(basis, grid)
    data = operator.apply_array(k, f.data, f.support_radius, radius)
    return SpectralField(data, f.dim, radius, check=False)


def advection_energy(basis: VelocityBasis, f: SpectralField) -> float:
    """Σ_k ‖M_k f‖²."""
    return sum(apply_Mk(basis, k, f).norm_sq() for k in range(basis.n_modes))


def basis_rows(basis: VelocityBasis) -> List[list]:
    """Linhas do CSV da base: índice, z, e, amplitude, paridade."""
    rows = []
    for k, mode in enumerate(basis.modes):
        rows.append([k, *mode.wavevector, *mode.polarization, mode.amplitude, mode.parity.value])
    return rows
