"""Constructive-interference geometry.

For an M-PSK symbol s (M >= 4) the two decision boundaries adjacent to s
point along s*exp(+j*pi/M) and s*exp(-j*pi/M).  Any received point z can be
decomposed as z = alpha_a*s_a + alpha_b*s_b; both coefficients are
nonnegative exactly when z lies inside the decision cone of s, and
min(alpha_a, alpha_b) is the safety margin used by the CI precoders (the
perpendicular distance differs only by the constant factor sin(2*pi/M)).
BPSK has a single boundary (the imaginary axis), so its margin is the signed
real part along s.  For QAM the margin is evaluated per real dimension
against the level grid of the intended symbol, after dividing the received
point by a receiver scale beta.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import ConfigError, as_matrix
from .modem import Constellation, INNER, OUTER

CONSTRUCTIVE = "constructive"
DESTRUCTIVE = "destructive"
NEUTRAL = "neutral"

_NEUTRAL_BAND = 1e-12
_GOLDEN_ITERS = 60
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


class BoundaryDirs(NamedTuple):
    s_a: complex
    s_b: complex


class CiDecomposition(NamedTuple):
    alpha_a: float
    alpha_b: float


@dataclass(frozen=True)
class MarginReport:
    per_user_margins: np.ndarray
    global_margin: float
    receiver_scale: float


@dataclass(frozen=True)
class QamConstraintSpec:
    """Per (user, dimension) target level and inner/outer class.

    levels[k, 0]/levels[k, 1] are the signed real/imaginary levels of user
    k's intended symbol; outer[k, d] marks dimensions whose decision region
    is unbounded (|level| at the grid maximum), which become inequality rows
    in the precoding LP, while inner dimensions become equality rows.
    """

    levels: np.ndarray
    outer: np.ndarray


def boundary_dirs(s: complex, m: int) -> BoundaryDirs:
    """Unit directions of the two decision boundaries adjacent to PSK symbol s."""
    if m == 2:
        raise ConfigError("BPSK has a single decision boundary; use bpsk_margin")
    if m < 4:
        raise ConfigError(f"PSK order must be >= 4 for boundary pairs, got {m}")
    rot = np.exp(1j * np.pi / m)
    return BoundaryDirs(s_a=complex(s * rot), s_b=complex(s / rot))


def decompose(z: complex, s: complex, m: int) -> CiDecomposition:
    """Coefficients of z along the boundary directions of s.

    Solves the 2x2 real system z = alpha_a*s_a + alpha_b*s_b.  Closed form:
    alpha_a = Im(z*conj(s_b)) / sin(2*pi/M), alpha_b = Im(conj(z)*s_a) / sin(2*pi/M).
    """
    dirs = boundary_dirs(s, m)
    sinf = np.sin(2.0 * np.pi / m)
    alpha_a = (z * np.conj(dirs.s_b)).imag / sinf
    alpha_b = (np.conj(z) * dirs.s_a).imag / sinf
    return CiDecomposition(float(alpha_a), float(alpha_b))


def bpsk_margin(z: complex, s: complex) -> float:
    """Signed distance of z from the imaginary axis, toward s in {+1, -1}."""
    return float((z * np.conj(s)).real)


def psk_margin(z: complex, s: complex, m: int) -> float:
    """Safety margin of z for intended PSK symbol s."""
    if m == 2:
        return bpsk_margin(z, s)
    d = decompose(z, s, m)
    return min(d.alpha_a, d.alpha_b)


def _point_margin(z: complex, s: complex, c: Constellation) -> float:
    if c.is_qam:
        lv, outer = _symbol_dims(np.array([s]), c)
        return float(np.min(_dim_margins(np.array([z.real, z.imag]), lv, outer, c.level_spacing / 2.0)))
    return psk_margin(z, s, c.m)


def classify_interference(desired: complex, interf: complex, s: complex, c: Constellation) -> str:
    """Constructive/destructive/neutral verdict of adding interf to desired."""
    base = _point_margin(desired, s, c)
    with_interf = _point_margin(desired + interf, s, c)
    if with_interf > base + _NEUTRAL_BAND:
        return CONSTRUCTIVE
    if with_interf < base - _NEUTRAL_BAND:
        return DESTRUCTIVE
    return NEUTRAL


# ---------------------------------------------------------------------------
# vectorized PSK machinery shared with the precoders

def psk_pair_dirs(s_vec: np.ndarray, m: int):
    """(s_a, s_b, sin(2*pi/M)) arrays for a vector of intended PSK symbols."""
    rot = np.exp(1j * np.pi / m)
    return s_vec * rot, s_vec / rot, np.sin(2.0 * np.pi / m)


def psk_coefficients(u: np.ndarray, s_vec: np.ndarray, m: int) -> np.ndarray:
    """Per-user (alpha_a, alpha_b) pairs for received points u; shape (K, 2)."""
    s_a, s_b, sinf = psk_pair_dirs(s_vec, m)
    alpha_a = (u * np.conj(s_b)).imag / sinf
    alpha_b = (np.conj(u) * s_a).imag / sinf
    return np.stack([alpha_a, alpha_b], axis=1)


def psk_user_margins(u: np.ndarray, s_vec: np.ndarray, m: int) -> np.ndarray:
    if m == 2:
        return (u * np.conj(s_vec)).real
    return psk_coefficients(u, s_vec, m).min(axis=1)


# ---------------------------------------------------------------------------
# QAM machinery

def qam_constraints(s_vec, c: Constellation) -> QamConstraintSpec:
    """Inner/outer constraint classes for a vector of intended QAM symbols."""
    if not c.is_qam:
        raise ConfigError("qam_constraints is only defined for QAM constellations")
    levels, outer = _symbol_dims(np.asarray(s_vec, dtype=complex), c)
    return QamConstraintSpec(levels=levels, outer=outer)


def _symbol_dims(s_vec: np.ndarray, c: Constellation):
    grid = c.levels
    re = grid[np.argmin(np.abs(s_vec.real[:, None] - grid[None, :]), axis=1)]
    im = grid[np.argmin(np.abs(s_vec.imag[:, None] - grid[None, :]), axis=1)]
    levels = np.stack([re, im], axis=1)
    outer = np.isclose(np.abs(levels), grid[-1])
    return levels, outer


def _dim_margins(u2: np.ndarray, levels2: np.ndarray, outer2: np.ndarray, half_delta: float) -> np.ndarray:
    """Detection margins of stacked dimensions u2 against signed levels2."""
    inner = half_delta - np.abs(u2 - levels2)
    outer = np.sign(levels2) * u2 - (np.abs(levels2) - half_delta)
    return np.where(outer2, outer, inner)


def qam_stacked_targets(spec: QamConstraintSpec):
    """Levels and outer flags in [re_users; im_users] stacking order."""
    levels2 = np.concatenate([spec.levels[:, 0], spec.levels[:, 1]])
    outer2 = np.concatenate([spec.outer[:, 0], spec.outer[:, 1]])
    return levels2, outer2


def qam_margins_at_beta(u: np.ndarray, spec: QamConstraintSpec, half_delta: float, beta: float) -> np.ndarray:
    """Per-user margins (min over the user's two dimensions) at receiver scale beta."""
    k = u.shape[0]
    u2 = np.concatenate([u.real, u.imag]) / beta
    levels2, outer2 = qam_stacked_targets(spec)
    dm = _dim_margins(u2, levels2, outer2, half_delta)
    return np.minimum(dm[:k], dm[k:])


def golden_beta(u: np.ndarray, spec: QamConstraintSpec, half_delta: float, beta_hi: float,
                iters: int = _GOLDEN_ITERS):
    """Golden-section search for the receiver scale maximizing the global margin.

    The global margin is quasi-concave in beta, so golden section over
    (0, beta_hi] converges; the best evaluated point is returned.
    """
    u2 = np.concatenate([u.real, u.imag])
    levels2, outer2 = qam_stacked_targets(spec)

    def g(beta: float) -> float:
        return float(np.min(_dim_margins(u2 / beta, levels2, outer2, half_delta)))

    a = beta_hi * 1e-9
    b = beta_hi
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = g(x1), g(x2)
    best_beta, best_val = (x1, f1) if f1 >= f2 else (x2, f2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = g(x2)
            if f2 > best_val:
                best_beta, best_val = x2, f2
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = g(x1)
            if f1 > best_val:
                best_beta, best_val = x1, f1
    return best_beta, best_val


def margin_report(H, x, s_vec, c: Constellation, beta="auto") -> MarginReport:
    """Safety margins of the noiseless receive H @ x against the intended symbols.

    PSK margins are receiver-scale free.  QAM margins are evaluated at
    u = (H @ x) / beta; beta="auto" maximizes the global margin by
    golden-section search over (0, 4*max|h_k @ x|].
    """
    Hm = as_matrix(H)
    u = Hm @ np.asarray(x, dtype=complex)
    s_vec = np.asarray(s_vec, dtype=complex)
    if not c.is_qam:
        per_user = psk_user_margins(u, s_vec, c.m)
        return MarginReport(per_user, float(per_user.min()), 1.0)

    spec = qam_constraints(s_vec, c)
    half_delta = c.level_spacing / 2.0
    if beta == "auto":
        beta_hi = max(4.0 * float(np.max(np.abs(u))), 1e-12)
        beta, _ = golden_beta(u, spec, half_delta, beta_hi)
    else:
        beta = float(beta)
        if not beta > 0:
            raise ConfigError(f"receiver scale must be positive, got {beta}")
    per_user = qam_margins_at_beta(u, spec, half_delta, beta)
    return MarginReport(per_user, float(per_user.min()), float(beta))
