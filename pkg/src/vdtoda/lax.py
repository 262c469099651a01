"""Matrix constructions for the isospectral formulation of the chain.

All matrices live in dimension N = 2n.  Rows and columns 1..n form the
"+" block and n+1..2n the "-" block; the reversal matrix R (anti-diagonal
ones) embeds n x n data into the "-" block as R M R, which reverses both
index orders.  The grading by diagonals (band index k) is respected by
multiplication, conjugation by R flips the band sign, and conjugation by
the skew block matrix Omega = [[0, R], [-R, 0]] does the same on the big
space.

``build_bundle`` assembles, at one state, every matrix of the Lax triad
X_H[L] = A L - L B and the Lax pair X_H[Lcal] = [Acal, Lcal]:

    D        block diagonal scaling, diag(Dn, R Dn^{-1} R)
    W        strictly lower, one populated subdiagonal
    L        = D (I + W), invertible lower bidiagonal
    A, B     pentadiagonal triad companions (kappa > 0)
    Acal     = D A D^{-1}, the Lax pair companion
    g, g_inv boundary gauge, tridiagonal for kappa > 0
    Hcal     = L (Omega L Omega^{-1})^{-1}, unreduced upper Hessenberg
    Lcal     = Hcal g, lower bandwidth 2
    Ycal     = (beta/2)(Lcal - Lcal^{-1}), generator of the matrix flow
    Q        diag(q_1..q_n, -q_n..-q_1)

Acal is computed both by conjugation and from its explicit block
entries; construction fails loudly if the two routes disagree.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
from scipy.linalg import solve_triangular

from .core import CrossCheckError, ModelParams, State
from .hamiltonian import DerivedCoords, derived_coords, xh_w

__all__ = [
    "LaxBundle",
    "graded_part",
    "strict_lower",
    "strict_upper",
    "diag_part",
    "reversal",
    "build_omega",
    "omega_conjugate",
    "build_bundle",
    "build_dcal_and_xhW",
    "hessenberg_parts",
]

_ACAL_CROSS_TOL = 1e-12
_HPARTS_CROSS_TOL = 1e-12


def graded_part(M: np.ndarray, k: int) -> np.ndarray:
    """Band k of M (k = 0 diagonal, k > 0 above, k < 0 below).

    The bands partition the matrix: summing graded_part over all k
    reconstructs M exactly.  |k| >= dim yields the zero matrix.
    """
    M = np.asarray(M)
    dim = M.shape[0]
    if abs(int(k)) >= dim:
        return np.zeros_like(M)
    return np.diag(np.diag(M, int(k)), int(k))


def strict_lower(M: np.ndarray) -> np.ndarray:
    """Sum of all bands with k < 0."""
    return np.tril(np.asarray(M), -1)


def strict_upper(M: np.ndarray) -> np.ndarray:
    """Sum of all bands with k > 0."""
    return np.triu(np.asarray(M), 1)


def diag_part(M: np.ndarray) -> np.ndarray:
    """Band k = 0."""
    return np.diag(np.diag(np.asarray(M)))


def reversal(n: int) -> np.ndarray:
    """Anti-diagonal permutation matrix R; R = R^T = R^{-1}."""
    return np.eye(int(n))[::-1].copy()


def _rev(M: np.ndarray) -> np.ndarray:
    # R M R reverses both index orders; pure entry moves, bitwise exact.
    return np.ascontiguousarray(M[::-1, ::-1])


def build_omega(n: int) -> np.ndarray:
    """The 2n x 2n block matrix [[0, R], [-R, 0]]; squares to -I."""
    n = int(n)
    R = reversal(n)
    out = np.zeros((2 * n, 2 * n))
    out[:n, n:] = R
    out[n:, :n] = -R
    return out


def omega_conjugate(M: np.ndarray) -> np.ndarray:
    """Omega M Omega^{-1}, evaluated as exact entry moves and sign flips.

    For M = [[P, S], [T, V]] in n x n blocks the conjugate is
    [[R V R, -R T R], [-R S R, R P R]]; no floating arithmetic beyond
    negation is involved, so structural zeros are preserved bitwise.
    """
    M = np.asarray(M)
    N = M.shape[0]
    if N % 2 or M.shape != (N, N):
        raise ValueError("expected a square matrix of even dimension")
    n = N // 2
    out = np.empty_like(M)
    out[:n, :n] = _rev(M[n:, n:])
    out[:n, n:] = -_rev(M[n:, :n])
    out[n:, :n] = -_rev(M[:n, n:])
    out[n:, n:] = _rev(M[:n, :n])
    return out


@dataclass(frozen=True)
class LaxBundle:
    """Every Lax-side matrix evaluated at one state.

    All entries are read-only; ``coords`` carries the derived scalar
    variables the matrices were built from, ``xhw`` the flow derivative
    of W (same subdiagonal pattern), and ``Lcal_inv`` the inverse Lax
    matrix obtained through the exact Omega conjugation of Hcal.
    """

    D: np.ndarray
    W: np.ndarray
    L: np.ndarray
    Dcal: np.ndarray
    A: np.ndarray
    B: np.ndarray
    Acal: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    Omega: np.ndarray
    Hcal: np.ndarray
    Lcal: np.ndarray
    Lcal_inv: np.ndarray
    Ycal: np.ndarray
    Q: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    coords: DerivedCoords
    xhw: np.ndarray

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.name == "coords":
                continue
            arr = np.asarray(getattr(self, f.name))
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {f.name}")
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, f.name, arr)


def _compose(pp: np.ndarray, pm: np.ndarray, mp: np.ndarray, mm: np.ndarray) -> np.ndarray:
    return np.block([[pp, pm], [mp, mm]])


def _delta_power(delta: float, c: float) -> float:
    # delta >= 1 always; exp(c ln delta) keeps all fractional powers on
    # one evaluation route.
    return float(np.exp(c * np.log(delta)))


def _w_subdiagonal(sw: np.ndarray) -> np.ndarray:
    # (sqrt(w_1) .. sqrt(w_{n-1}), sqrt(w_n), -sqrt(w_{n-1}) .. -sqrt(w_1))
    return np.concatenate([sw[:-1], sw[-1:], -sw[-2::-1]])


def _dcal_diagonal(coords: DerivedCoords, params: ModelParams) -> np.ndarray:
    """Diagonal of the n x n flow-derivative block of D."""
    beta, kappa = params.beta, params.kappa
    x, w, delta = coords.x, coords.w, coords.delta
    v = (1.0 / x[:-1] + x[1:]) * w[:-1]
    d = np.empty(params.n)
    d[0] = v[0]
    d[1:-1] = v[1:] - v[:-1]
    d[-2] += kappa * w[-2] * w[-1]
    d[-1] = (
        -v[-1]
        + 2.0 * w[-1] * delta / x[-1]
        + 4.0 * kappa * w[-1]
        + kappa * w[-2] * w[-1]
        + kappa * kappa * w[-1] * coords.gamma
    )
    return 0.25 * beta * d


def build_dcal_and_xhW(
    state: State, params: ModelParams, coords: DerivedCoords | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Flow derivatives of the factors of L.

    Dcal is D^{-1} X_H[D]: block diagonal with the n x n entries above
    in the "+" block and their negated reversal in the "-" block.  XhW
    is X_H[W]: same subdiagonal pattern as W, populated with
    X_H[w_a^{1/2}] = X_H[w_a] / (2 w_a^{1/2}).
    """
    if coords is None:
        coords = derived_coords(state, params)
    n = params.n
    dcal = _dcal_diagonal(coords, params)
    Dcal = np.diag(np.concatenate([dcal, -dcal[::-1]]))
    half = 0.5 * xh_w(state, params) / np.sqrt(coords.w)
    XhW = np.zeros((2 * n, 2 * n))
    XhW[np.arange(1, 2 * n), np.arange(2 * n - 1)] = np.concatenate(
        [half[:-1], half[-1:], -half[-2::-1]]
    )
    return Dcal, XhW


def _triad_blocks(
    coords: DerivedCoords, params: ModelParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """phi, psi, A, B (A and B already composed to size N)."""
    beta, kappa, n = params.beta, params.kappa, params.n
    x, w, delta = coords.x, coords.w, coords.delta
    sw = np.sqrt(w)
    corner = kappa * w[-2] * w[-1]

    phi = np.empty(n)
    phi[0] = x[1] * w[0] - x[0] - 1.0 / x[0]
    phi[1:-1] = w[:-2] / x[:-2] + x[2:] * w[1:-1] - x[1:-1] - 1.0 / x[1:-1]
    phi[-2] += corner
    phi[-1] = w[-2] / x[-2] - x[-1] - (1.0 - w[-1]) * delta / x[-1] + corner
    phi *= 0.25 * beta

    psi = np.empty(n)
    psi[0] = x[0] + (1.0 - w[0]) / x[0]
    psi[1:-1] = x[1:-1] * (1.0 - w[:-2]) + (1.0 - w[1:-1]) / x[1:-1]
    psi[-1] = x[-1] * (1.0 - w[-2]) + (1.0 - w[-1]) * delta / x[-1] - 2.0 * corner
    psi *= -0.25 * beta

    # Corner correction shared by the diagonal blocks of A.
    bump = 0.5 * beta * kappa * w[-1] + 0.25 * beta * kappa * kappa * w[-1] * coords.gamma
    half = 0.5 * beta

    App = np.diag(phi)
    App[-1, -1] += bump
    i = np.arange(n - 1)
    App[i, i + 1] = half * sw[:-1] / x[:-1]
    App[i + 1, i] = -half * sw[:-1] * x[:-1]

    Amm = np.diag(phi)
    Amm[-1, -1] -= bump
    j = np.arange(n - 2)
    Amm[j, j + 1] = half * sw[:-2] / x[1:-1]
    Amm[j + 1, j] = -half * sw[:-2] * x[1:-1]
    Amm[-2, -1] = half * sw[-2] * delta / x[-1]
    Amm[-1, -2] = -half * sw[-2] * x[-1]

    Apm = np.zeros((n, n))
    Apm[-1, 0] = half * sw[-1] * (delta / x[-1] + kappa * (1.0 + w[-2]))
    Apm[-1, 1] = half * kappa * sw[-2] * sw[-1]
    Amp = np.zeros((n, n))
    Amp[0, -1] = -half * sw[-1] * (x[-1] + kappa * (1.0 + w[-1]))
    Amp[1, -1] = half * kappa * sw[-2] * sw[-1]
    A = _compose(App, Apm, Amp, _rev(Amm))

    Bpp = np.diag(psi)
    Bpp[j, j + 1] = half * sw[:-2] / x[:-2]
    Bpp[j + 1, j] = -half * sw[:-2] * x[1:-1]
    Bpp[-2, -1] = half * sw[-2] / x[-2]
    Bpp[-1, -2] = -half * sw[-2] * (x[-1] + kappa * w[-1])
    Bpm = np.zeros((n, n))
    Bpm[-1, 0] = half * sw[-1] * (delta / x[-1] + kappa)
    Bpm[-1, 1] = half * kappa * sw[-2] * sw[-1]
    B = _compose(Bpp, Bpm, -_rev(Bpm), _rev(Bpp))

    return phi, psi, A, B


def _acal_explicit(
    coords: DerivedCoords, params: ModelParams, phi: np.ndarray, bump: float
) -> np.ndarray:
    """Acal from its displayed block entries (the D-conjugated triad blocks)."""
    beta, kappa, n = params.beta, params.kappa, params.n
    x, w, delta = coords.x, coords.w, coords.delta
    sx, sw = np.sqrt(x), np.sqrt(w)
    half = 0.5 * beta
    sup = half * sw[:-2] / (sx[:-2] * sx[1:-1])
    sub = -half * sw[:-2] * sx[:-2] * sx[1:-1]
    j = np.arange(n - 2)

    pp = np.diag(phi)
    pp[-1, -1] += bump
    pp[j, j + 1] = sup
    pp[j + 1, j] = sub
    pp[-2, -1] = half * sw[-2] * _delta_power(delta, 0.25) / (sx[-2] * sx[-1])
    pp[-1, -2] = -half * sw[-2] * sx[-2] * sx[-1] * _delta_power(delta, -0.25)

    mm = np.diag(phi)
    mm[-1, -1] -= bump
    mm[j, j + 1] = sup
    mm[j + 1, j] = sub
    mm[-2, -1] = half * sw[-2] * _delta_power(delta, 0.75) / (sx[-2] * sx[-1])
    mm[-1, -2] = -half * sw[-2] * sx[-2] * sx[-1] * _delta_power(delta, 0.25)

    pm = np.zeros((n, n))
    pm[-1, 0] = half * sw[-1] * _delta_power(delta, 0.5) * (
        1.0 + kappa * x[-1] * (1.0 + w[-2]) / delta
    )
    pm[-1, 1] = half * kappa * sx[-2] * sx[-1] * sw[-2] * sw[-1] * _delta_power(delta, -0.25)
    mp = np.zeros((n, n))
    mp[0, -1] = -half * sw[-1] * _delta_power(delta, 0.5) * (
        1.0 + kappa * (1.0 + w[-1]) / x[-1]
    )
    mp[1, -1] = half * kappa * sw[-2] * sw[-1] * _delta_power(delta, 0.25) / (sx[-2] * sx[-1])

    return _compose(pp, pm, mp, _rev(mm))


def build_bundle(state: State, params: ModelParams) -> LaxBundle:
    """Assemble every Lax-side matrix at one state.

    Raises ``CrossCheckError`` if the conjugation route and the explicit
    block entries for Acal disagree beyond 1e-12 relative to the largest
    entry.
    """
    coords = derived_coords(state, params)
    beta, kappa, n = params.beta, params.kappa, params.n
    N = 2 * n
    x, w, delta = coords.x, coords.w, coords.delta
    sw = np.sqrt(w)

    dn = np.sqrt(x)
    dn[-1] *= _delta_power(delta, -0.25)
    d = np.concatenate([dn, (1.0 / dn)[::-1]])
    D = np.diag(d)

    W = np.zeros((N, N))
    W[np.arange(1, N), np.arange(N - 1)] = _w_subdiagonal(sw)
    L = d[:, None] * (np.eye(N) + W)

    phi, psi, A, B = _triad_blocks(coords, params)
    bump = 0.5 * beta * kappa * w[-1] + 0.25 * beta * kappa * kappa * w[-1] * coords.gamma
    Acal = _acal_explicit(coords, params, phi, bump)
    Acal_conj = (d[:, None] / d[None, :]) * A
    gap = float(np.max(np.abs(Acal - Acal_conj)))
    scale = max(1.0, float(np.max(np.abs(Acal))))
    if gap > _ACAL_CROSS_TOL * scale:
        raise CrossCheckError(
            f"Acal construction routes disagree: |diff| = {gap:.3e} > {_ACAL_CROSS_TOL * scale:.3e}"
        )

    sqrt_delta = _delta_power(delta, 0.5)
    g = np.eye(N)
    g[n - 1, n - 1] = g[n, n] = sqrt_delta
    g[n - 1, n] = g[n, n - 1] = kappa * sw[-1]
    g_inv = np.eye(N)
    g_inv[n - 1, n - 1] = g_inv[n, n] = sqrt_delta
    g_inv[n - 1, n] = g_inv[n, n - 1] = -kappa * sw[-1]

    Omega = build_omega(n)
    # Omega L Omega^{-1} = D^{-1} (I - W^T) is upper bidiagonal, so Hcal
    # solves a triangular system; forward substitution leaves exact
    # zeros below the first subdiagonal.
    U = omega_conjugate(L)
    Hcal = solve_triangular(U.T, L.T, lower=True).T
    Lcal = Hcal @ g
    Lcal_inv = g_inv @ omega_conjugate(Hcal)
    Ycal = 0.5 * beta * (Lcal - Lcal_inv)

    Q = np.diag(np.concatenate([state.xi, -state.xi[::-1]]))
    Dcal, XhW = build_dcal_and_xhW(state, params, coords)

    return LaxBundle(
        D=D,
        W=W,
        L=L,
        Dcal=Dcal,
        A=A,
        B=B,
        Acal=Acal,
        g=g,
        g_inv=g_inv,
        Omega=Omega,
        Hcal=Hcal,
        Lcal=Lcal,
        Lcal_inv=Lcal_inv,
        Ycal=Ycal,
        Q=Q,
        phi=phi,
        psi=psi,
        coords=coords,
        xhw=XhW,
    )


def hessenberg_parts(
    state: State, params: ModelParams, bundle: LaxBundle | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form bands -1, 0, 1 of the Hessenberg factor Hcal.

    With T = I + W W^T (diagonal, entries 1 and 1 + w), the bands are
    D W D, D T D and D T W^T D.  Each is checked against the
    corresponding ``graded_part`` of the numerically solved Hcal.
    """
    if bundle is None:
        bundle = build_bundle(state, params)
    d = np.diag(bundle.D)
    sub = np.diag(bundle.W, -1)
    t = np.ones(d.shape[0])
    t[1:] += sub * sub

    H_m1 = d[:, None] * bundle.W * d[None, :]
    H_0 = np.diag(d * t * d)
    H_1 = np.zeros_like(H_m1)
    i = np.arange(d.shape[0] - 1)
    H_1[i, i + 1] = d[:-1] * t[:-1] * sub * d[1:]

    for k, closed in ((-1, H_m1), (0, H_0), (1, H_1)):
        band = graded_part(bundle.Hcal, k)
        scale = max(1.0, float(np.max(np.abs(band))))
        gap = float(np.max(np.abs(closed - band)))
        if gap > _HPARTS_CROSS_TOL * scale:
            raise CrossCheckError(
                f"band {k} of Hcal disagrees with closed form: "
                f"|diff| = {gap:.3e} > {_HPARTS_CROSS_TOL * scale:.3e}"
            )
    return H_m1, H_0, H_1
