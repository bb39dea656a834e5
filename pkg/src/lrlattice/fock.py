"""Brute-force oracle on truncated multi-site Fock spaces.

Everything here is a dense matrix: 1 to 3 oscillators, each truncated to
boson numbers <= N, a periodic chain Hamiltonian, Weyl operators built as
exact matrix exponentials, and Heisenberg / perturbed (Dyson) evolution by
Hermitian eigendecomposition.  The point is independent ground truth for
the exact-arithmetic Weyl algebra: commutator norms, the Weyl relation,
perturbed dynamics, and finite-volume convergence can all be measured
directly here and compared against the closed-form layer.

Conventions match the algebra layer: W(f) = exp(i sum_x Re f(x) q_x +
Im f(x) p_x), H = sum_x p_x^2 + omega^2 q_x^2 + sum_x lambda (q_x -
q_{x+1})^2 with periodic identification, so a 2-site ring carries the
(0,1) bond twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .harmonic import Field, HarmonicParameters, SingularModeError
from .lattice import DecayProfile, DomainError, GeometryMismatchError, LatticeGeometry
from .perturbations import PerturbationFamily

__all__ = [
    "TruncationLeakageError",
    "FockConfig",
    "DenseOperator",
    "SiteOperators",
    "build_site_operators",
    "build_hamiltonian",
    "hamiltonian_spectrum",
    "weyl_matrix",
    "heisenberg_evolve",
    "restricted_norm",
    "perturbation_matrix",
    "perturbed_evolve",
    "commutator_oracle",
    "BoundedInteraction",
    "interaction_from_family",
    "interaction_norm_a",
    "volume_compare",
    "diagonalization_defect",
]

MAX_DIMENSION = 250_000
LEAKAGE_LIMIT = 1e-6


class TruncationLeakageError(ArithmeticError):
    """A Weyl matrix pushed too much vacuum weight against the cutoff."""

    def __init__(self, message: str, leakage: float):
        super().__init__(message)
        self.leakage = leakage


@dataclass(frozen=True)
class FockConfig:
    """Truncated periodic chain: ``sites`` oscillators, numbers <= ``cutoff``."""

    sites: int
    cutoff: int
    params: HarmonicParameters

    def __post_init__(self):
        if not 1 <= self.sites <= 3:
            raise DomainError("the oracle handles 1 to 3 sites")
        if self.cutoff < 6:
            raise DomainError("cutoff below 6 leaves no room for leakage accounting")
        if self.params.dimension != 1:
            raise DomainError("the oracle chain is one-dimensional")
        if self.dimension > MAX_DIMENSION:
            raise DomainError(
                f"matrix dimension {self.dimension} exceeds the desk-scale "
                f"guard {MAX_DIMENSION}"
            )

    @property
    def dimension(self) -> int:
        return (self.cutoff + 1) ** self.sites


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Dense matrix observable on the truncated product space."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DomainError("operator entries must form a square matrix")
        if not np.all(np.isfinite(entries.real)) or (
            np.iscomplexobj(entries) and not np.all(np.isfinite(entries.imag))
        ):
            raise DomainError("operator entries must be finite")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def identity(cls, dim: int) -> "DenseOperator":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def adjoint(self) -> "DenseOperator":
        return DenseOperator(self.entries.conj().T)

    def norm(self) -> float:
        return _spectral_norm(self.entries)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def __add__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.entries + other.entries)

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.entries - other.entries)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.entries @ other.entries)

    def scaled(self, factor: complex) -> "DenseOperator":
        return DenseOperator(factor * self.entries)


def _spectral_norm(matrix: np.ndarray) -> float:
    """Operator 2-norm; large matrices go through one Hermitian solve."""
    if matrix.shape[0] <= 512:
        return float(np.linalg.norm(matrix, 2))
    gram = matrix.conj().T @ matrix
    top = float(np.linalg.eigvalsh(gram)[-1])
    return math.sqrt(max(top, 0.0))


def _occupation_grid(sites: int, cutoff: int) -> np.ndarray:
    """Total boson number of each product basis state (site 0 leftmost)."""
    occupation = np.zeros(1)
    for _ in range(sites):
        occupation = (occupation[:, None] + np.arange(cutoff + 1)[None, :]).ravel()
    return occupation


def restricted_norm(config: FockConfig, operator: DenseOperator, occupation_cap: int = 8) -> float:
    """Operator norm on the subspace with total occupation <= occupation_cap.

    Any comparison between a truncated operator and its untruncated ideal
    is only meaningful well below the cutoff.  The corruption is not
    confined to the edge: the free propagator of a mode with dispersion g
    couples occupations two quanta apart with strength |g^2 - 1|/(g^2 + 1)
    per pair, so cutoff damage reaches an occupation-K state at strength
    roughly that ratio to the power (reach - K)/2.  Shrinking the cap
    therefore buys exponential accuracy, while the exact algebra values
    being probed (Weyl operators with small labels) are already fully
    represented on a handful of quanta.  The default cap of 8 keeps the
    truncated identity's norm 1 - O(1e-10) for labels up to norm 1.
    """
    if operator.dim != config.dimension:
        raise DomainError("operator dimension does not match the configuration")
    if not 0 <= occupation_cap <= config.sites * config.cutoff:
        raise DomainError("occupation cap must lie between 0 and the total occupancy")
    keep = _occupation_grid(config.sites, config.cutoff) <= occupation_cap
    return _spectral_norm(operator.entries[np.ix_(keep, keep)])


def _ladder(cutoff: int) -> np.ndarray:
    a = np.zeros((cutoff + 1, cutoff + 1))
    for i in range(cutoff):
        a[i, i + 1] = math.sqrt(i + 1.0)
    return a


def _embed(factor: np.ndarray, site: int, sites: int, cutoff: int) -> np.ndarray:
    """Tensor a single-site matrix into position ``site`` (site 0 leftmost)."""
    out = np.array([[1.0]])
    eye = np.eye(cutoff + 1)
    for position in range(sites):
        out = np.kron(out, factor if position == site else eye)
    return out


@dataclass(frozen=True)
class SiteOperators:
    q: DenseOperator
    p: DenseOperator
    a: DenseOperator
    a_dag: DenseOperator


def build_site_operators(config: FockConfig) -> tuple[SiteOperators, ...]:
    """Embedded position, momentum, and ladder matrices for every site."""
    a = _ladder(config.cutoff)
    q_site = (a + a.T) / math.sqrt(2.0)
    p_site = (a - a.T) * (-1j / math.sqrt(2.0))
    out = []
    for site in range(config.sites):
        out.append(
            SiteOperators(
                q=DenseOperator(_embed(q_site, site, config.sites, config.cutoff)),
                p=DenseOperator(_embed(p_site, site, config.sites, config.cutoff)),
                a=DenseOperator(_embed(a, site, config.sites, config.cutoff)),
                a_dag=DenseOperator(_embed(a.T, site, config.sites, config.cutoff)),
            )
        )
    return tuple(out)


def build_hamiltonian(config: FockConfig) -> DenseOperator:
    """Periodic-chain Hamiltonian as an exactly symmetric real matrix.

    Single-site pieces and bond squares are assembled from symmetric or
    antisymmetric real factors whose products are symmetric entry for
    entry, so the Hermiticity defect is exactly zero rather than roundoff.
    """
    n, cutoff = config.sites, config.cutoff
    omega, lam = config.params.omega, config.params.couplings[0]
    a = _ladder(cutoff)
    q_site = (a + a.T) / math.sqrt(2.0)
    # p^2 = -(a - a^T)^2 / 2 stays real; the antisymmetric factor squares
    # to an exactly symmetric matrix.
    anti = a - a.T
    p_sq_site = -0.5 * (anti @ anti)
    h_site = p_sq_site + omega**2 * (q_site @ q_site)

    total = np.zeros((config.dimension, config.dimension))
    for site in range(n):
        total += _embed(h_site, site, n, cutoff)
    if n > 1 and lam != 0.0:
        q_embedded = [_embed(q_site, site, n, cutoff) for site in range(n)]
        for site in range(n):
            diff = q_embedded[site] - q_embedded[(site + 1) % n]
            total += lam * (diff @ diff)
    return DenseOperator(total)


@lru_cache(maxsize=4)
def _hamiltonian_eigh(config: FockConfig):
    h = build_hamiltonian(config).entries
    evals, evecs = np.linalg.eigh(h)
    return evals, evecs


def hamiltonian_spectrum(config: FockConfig, count: int = 8) -> np.ndarray:
    """The ``count`` lowest eigenvalues of the truncated Hamiltonian."""
    evals, _ = _hamiltonian_eigh(config)
    return np.array(evals[:count])


def _site_amplitudes(config: FockConfig, f: Field) -> list[complex]:
    """Match a label's geometry to the chain and read per-site amplitudes."""
    geometry = f.geometry
    if geometry.dimension != 1:
        raise GeometryMismatchError("oracle labels must live on a one-dimensional lattice")
    amplitudes = [0j] * config.sites
    if geometry.is_torus:
        if geometry.extent != config.sites:
            raise GeometryMismatchError(
                f"torus extent {geometry.extent} does not match {config.sites} sites"
            )
        for site, value in f.items_sorted():
            amplitudes[site[0] % config.sites] += value
    else:
        for site, value in f.items_sorted():
            if not 0 <= site[0] < config.sites:
                raise DomainError(f"label site {site} outside the chain 0..{config.sites - 1}")
            amplitudes[site[0]] = value
    return amplitudes


def weyl_matrix(config: FockConfig, f: Field) -> DenseOperator:
    """Matrix Weyl operator exp(i sum_x Re f(x) q_x + Im f(x) p_x).

    Per-site generators commute, so the exponential factorizes into a
    tensor product of single-site exponentials, each from a Hermitian
    eigendecomposition.  Truncation adequacy is checked by the vacuum
    leakage past number cutoff - 5 and rejected above 1e-6.
    """
    amplitudes = _site_amplitudes(config, f)
    cutoff = config.cutoff
    a = _ladder(cutoff)
    q_site = (a + a.T) / math.sqrt(2.0)
    p_site = (a - a.T) * (-1j / math.sqrt(2.0))

    full = np.array([[1.0]], dtype=complex)
    vacuum_columns = []
    for amp in amplitudes:
        if amp == 0:
            factor = np.eye(cutoff + 1, dtype=complex)
        else:
            generator = amp.real * q_site + amp.imag * p_site
            evals, evecs = np.linalg.eigh(generator)
            factor = (evecs * np.exp(1j * evals)) @ evecs.conj().T
        vacuum_columns.append(factor[:, 0])
        full = np.kron(full, factor)

    occupation = np.zeros(1)
    moved = np.array([[1.0]], dtype=complex)
    for column in vacuum_columns:
        occupation = (occupation[:, None] + np.arange(cutoff + 1)[None, :]).ravel()
        moved = np.kron(moved, column.reshape(-1, 1))
    leakage = float(np.linalg.norm(moved.ravel()[occupation > cutoff - 5]))
    if leakage > LEAKAGE_LIMIT:
        raise TruncationLeakageError(
            f"vacuum leakage {leakage:.3e} past the cutoff exceeds {LEAKAGE_LIMIT:.0e}; "
            "raise the cutoff or shrink the label",
            leakage,
        )
    return DenseOperator(full)


def _conjugate(evals: np.ndarray, evecs: np.ndarray, t: float, matrix: np.ndarray) -> np.ndarray:
    """e^{itH} matrix e^{-itH} in the eigenbasis of H."""
    propagator = (evecs * np.exp(1j * t * evals)) @ evecs.conj().T
    moved = propagator @ matrix
    moved = moved @ propagator.conj().T
    return moved


def heisenberg_evolve(config: FockConfig, operator: DenseOperator, t: float) -> DenseOperator:
    """Free Heisenberg evolution by unitary conjugation."""
    if operator.dim != config.dimension:
        raise DomainError("operator dimension does not match the configuration")
    evals, evecs = _hamiltonian_eigh(config)
    return DenseOperator(_conjugate(evals, evecs, float(t), operator.entries))


def perturbation_matrix(config: FockConfig, family: PerturbationFamily) -> DenseOperator:
    """Assemble sum over measures of w (W(z delta_X) + W(-z delta_X)).

    Representative atoms contribute w (W + W^dag), which is Hermitian entry
    for entry; a self-mirrored zero atom contributes its weight once.
    """
    total = np.zeros((config.dimension, config.dimension), dtype=complex)
    geometry = family.geometry
    for measure in family.measures:
        for z, weight in measure.atoms:
            if all(value == 0 for value in z):
                total += weight * np.eye(config.dimension)
                continue
            entries = {site: value for site, value in zip(measure.sites, z)}
            field = _field_from_entries(geometry, entries)
            w_matrix = weyl_matrix(config, field).entries
            total += weight * (w_matrix + w_matrix.conj().T)
    return DenseOperator(total)


def _field_from_entries(geometry: LatticeGeometry, entries: dict) -> Field:
    field = Field.zero(geometry)
    for site, value in entries.items():
        field = field + Field.delta(geometry, site, value)
    return field


@lru_cache(maxsize=4)
def _perturbed_eigh(config: FockConfig, family: PerturbationFamily):
    h = build_hamiltonian(config).entries + perturbation_matrix(config, family).entries
    evals, evecs = np.linalg.eigh(h)
    return evals, evecs


def _perturbed_conjugate(
    config: FockConfig, family: PerturbationFamily, entries: np.ndarray, t: float
) -> np.ndarray:
    if not family.measures:
        evals, evecs = _hamiltonian_eigh(config)
    else:
        evals, evecs = _perturbed_eigh(config, family)
    return _conjugate(evals, evecs, t, entries)


def perturbed_evolve(
    config: FockConfig,
    family: PerturbationFamily,
    operator: DenseOperator,
    t: float,
    quad_steps: int = 32,
):
    """Exact evolution under H + P, plus the integral-equation residual.

    Returns (evolved operator, residual): the evolved operator comes from
    the eigendecomposition of the perturbed Hamiltonian, and the residual
    is the norm of

        alpha_t^P(A) - alpha_t(A) - i int_0^t alpha_s^P([P, alpha_{t-s}(A)]) ds

    with the integral evaluated by composite Simpson quadrature on
    ``quad_steps`` intervals.  The residual is pure quadrature error (the
    identity is exact on the truncated space), so it shrinks at order >= 2
    as ``quad_steps`` doubles.
    """
    if operator.dim != config.dimension:
        raise DomainError("operator dimension does not match the configuration")
    if quad_steps < 2 or quad_steps % 2 != 0:
        raise DomainError("Simpson quadrature needs an even, positive step count")
    t = float(t)
    if not family.measures:
        evolved = heisenberg_evolve(config, operator, t)
        return evolved, 0.0

    evals_h, evecs_h = _hamiltonian_eigh(config)
    evals_p, evecs_p = _perturbed_eigh(config, family)
    p_entries = perturbation_matrix(config, family).entries
    a_entries = operator.entries

    evolved = _conjugate(evals_p, evecs_p, t, a_entries)
    free = _conjugate(evals_h, evecs_h, t, a_entries)

    nodes = np.linspace(0.0, t, quad_steps + 1)
    weights = np.ones(quad_steps + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    weights *= (t - 0.0) / quad_steps / 3.0

    integral = np.zeros_like(evolved)
    for s, weight in zip(nodes, weights):
        inner = _conjugate(evals_h, evecs_h, t - s, a_entries)
        bracket = p_entries @ inner - inner @ p_entries
        integral += weight * _conjugate(evals_p, evecs_p, s, bracket)

    residual = _spectral_norm(evolved - free - 1j * integral)
    return DenseOperator(evolved), float(residual)


def commutator_oracle(config: FockConfig, f: Field, g: Field, t: float) -> float:
    """Norm of [tau_t(W(f)), W(g)] measured directly on matrices.

    The evolution is an elementwise phase twist in the Hamiltonian
    eigenbasis; the commutator is then rotated back so the norm can be
    taken on the low-occupation subspace (see :func:`restricted_norm`),
    which is what converges to the exact-algebra value as the cutoff
    grows.
    """
    evals, evecs = _hamiltonian_eigh(config)
    w_f = weyl_matrix(config, f).entries
    w_g = weyl_matrix(config, g).entries

    f_tilde = evecs.T @ w_f @ evecs
    del w_f
    phases = np.exp(1j * float(t) * evals)
    f_tilde *= phases[:, None]
    f_tilde *= phases.conj()[None, :]
    moved = evecs @ f_tilde @ evecs.T
    del f_tilde

    commutator = moved @ w_g
    commutator -= w_g @ moved
    del moved, w_g
    cap = min(8, config.sites * config.cutoff)
    return restricted_norm(config, DenseOperator(commutator), occupation_cap=cap)


@dataclass(frozen=True)
class BoundedInteraction:
    """Finite map from site subsets to self-adjoint matrix terms."""

    geometry: LatticeGeometry
    terms: tuple

    def __post_init__(self):
        seen = []
        for sites, operator in self.terms:
            sites = tuple(self.geometry.site(s) for s in sites)
            if len(set(sites)) != len(sites):
                raise DomainError("interaction term sites must be distinct")
            if operator.hermiticity_defect() > 1e-12 * max(1.0, operator.norm()):
                raise DomainError(f"interaction term on {sites} is not self-adjoint")
            seen.append((sites, operator))
        object.__setattr__(self, "terms", tuple(seen))


def interaction_from_family(config: FockConfig, family: PerturbationFamily) -> BoundedInteraction:
    """Materialize each measure as one self-adjoint matrix term."""
    terms = []
    for measure in family.measures:
        single = PerturbationFamily(family.geometry, measure.sites, (measure,))
        terms.append((measure.sites, perturbation_matrix(config, single)))
    return BoundedInteraction(family.geometry, tuple(terms))


def interaction_norm_a(
    interaction: BoundedInteraction, profile: DecayProfile, geometry: LatticeGeometry
) -> float:
    """Decay-weighted interaction norm: sup over site pairs of the term sum.

    For each pair (x, y), sums the matrix norms of all terms whose support
    contains both, divided by the decay weight at their distance.
    """
    if profile.dimension != geometry.dimension:
        raise GeometryMismatchError("profile dimension does not match the geometry")
    norms = [(sites, term.norm()) for sites, term in interaction.terms]
    best = 0.0
    all_sites = sorted({s for sites, _ in norms for s in sites})
    for x in all_sites:
        for y in all_sites:
            total = math.fsum(n for sites, n in norms if x in sites and y in sites)
            if total == 0.0:
                continue
            best = max(best, total / profile.value(geometry.distance(x, y)))
    return best


def volume_compare(
    config_small: FockConfig,
    config_large: FockConfig,
    family: PerturbationFamily | None,
    operator: DenseOperator,
    t_grid,
) -> float:
    """Max difference norm between small- and large-volume evolutions.

    The observable lives on the small volume and is identity-tensored into
    the large one (small sites first).  The perturbation family is
    restricted to whatever fits in each volume; both volumes share the
    cutoff so the embeddings agree.
    """
    if config_small.sites > config_large.sites:
        raise DomainError("the small volume must embed in the large one")
    if config_small.cutoff != config_large.cutoff:
        raise DomainError("volume comparison needs a common per-site cutoff")
    if config_small.params != config_large.params:
        raise DomainError("volume comparison needs common model parameters")
    if operator.dim != config_small.dimension:
        raise DomainError("observable must live on the small volume")

    extra = config_large.sites - config_small.sites
    pad = np.eye((config_small.cutoff + 1) ** extra) if extra else np.array([[1.0]])
    embedded = DenseOperator(np.kron(operator.entries, pad))

    small_sites = [(s,) for s in range(config_small.sites)]
    large_sites = [(s,) for s in range(config_large.sites)]
    if family is None:
        family = PerturbationFamily.empty(LatticeGeometry.infinite(1))
    family_small = family.restricted([s for s in family.volume if s in set(small_sites)])
    family_large = family.restricted([s for s in family.volume if s in set(large_sites)])

    worst = 0.0
    for t in t_grid:
        small_t = _perturbed_conjugate(config_small, family_small, operator.entries, float(t))
        large_t = _perturbed_conjugate(config_large, family_large, embedded.entries, float(t))
        lifted = np.kron(small_t, pad)
        worst = max(worst, _spectral_norm(lifted - large_t))
    return worst


def diagonalization_defect(config: FockConfig) -> float:
    """Distance between H and its Fourier-mode normal form, low states only.

    Builds b_k = (gamma^{1/2} Q_k + i gamma^{-1/2} P_k) / sqrt(2) from the
    discrete Fourier transforms of the site operators and compares
    sum_k gamma(k) (2 b_k^dag b_k + 1) against the Hamiltonian, projected
    onto total occupation <= cutoff - 2 where the cutoff cannot interfere.
    """
    if config.params.is_massless:
        raise SingularModeError("the k = 0 mode has no normal form when omega = 0")
    n, cutoff = config.sites, config.cutoff
    site_ops = build_site_operators(config)
    dim = config.dimension

    check = np.zeros((dim, dim), dtype=complex)
    for j in range(n):
        k = 2.0 * math.pi * j / n
        g = math.sqrt(
            config.params.omega**2 + 4.0 * config.params.couplings[0] * math.sin(k / 2.0) ** 2
        )
        q_k = np.zeros((dim, dim), dtype=complex)
        p_k = np.zeros((dim, dim), dtype=complex)
        for x in range(n):
            phase = np.exp(-1j * k * x) / math.sqrt(n)
            q_k += phase * site_ops[x].q.entries
            p_k += phase * site_ops[x].p.entries
        b_k = (math.sqrt(g) * q_k + 1j / math.sqrt(g) * p_k) / math.sqrt(2.0)
        check += g * (2.0 * (b_k.conj().T @ b_k) + np.eye(dim))

    h = build_hamiltonian(config).entries
    occupation = np.zeros(1)
    for _ in range(n):
        occupation = (occupation[:, None] + np.arange(cutoff + 1)[None, :]).ravel()
    keep = occupation <= cutoff - 2
    defect = (h - check)[np.ix_(keep, keep)]
    return _spectral_norm(defect)
