"""Model parameters, the 4x4 system matrix and its explicit eigen-decomposition.

Everything downstream (feedback coefficients, kernels, the assumption check)
is a ratio of functions built from ``cosh``/``sinh`` of ``nu1*tau`` and
``nu3*tau``.  Those grow like ``exp(|nu3| tau)`` and overflow for realistic
parameter boxes, so the hyperbolic combinations are evaluated *scaled* by
``exp(-|nu3| tau)``.  Ratios are formed from the scaled values directly; the
unscaled public evaluators multiply the factor back and refuse to overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

# largest exponent we are willing to feed to exp() before calling it overflow
MAX_EXPONENT = 700.0
DEFAULT_FLOOR = 1e-10
UINV_RESIDUAL_TOL = 1e-9


class ModelError(Exception):
    """Base class for numerical-model failures."""


class InvalidParameters(ModelError, ValueError):
    pass


class NonPositiveDiscriminant(ModelError):
    """c1 - c2 is not positive, so nu1 would not be real and negative."""


class SingularU(ModelError):
    pass


class AssumptionViolated(ModelError):
    """The denominator of v0 came within the floor of zero."""


@dataclass(frozen=True)
class ModelParams:
    lambda_temp: float
    gamma: float
    kappa: float
    rho: float
    varrho: float
    phi: float
    horizon: float
    x0: float = 10.0
    y0: float = 0.0

    def __post_init__(self) -> None:
        for name in ("lambda_temp", "gamma", "kappa", "rho", "varrho", "phi", "horizon"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameters(f"{name} must be finite and > 0, got {value!r}")
        # x0 = y0 = 0 is the trivial do-nothing instance; keep it constructible
        for name in ("x0", "y0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidParameters(f"{name} must be finite and >= 0, got {value!r}")

    def with_(self, **changes: float) -> "ModelParams":
        return replace(self, **changes)

    @property
    def xi(self) -> tuple[float, ...]:
        """The 7-tuple (lambda, gamma, kappa, rho, varrho, phi, T)."""
        return (self.lambda_temp, self.gamma, self.kappa, self.rho, self.varrho, self.phi, self.horizon)

    @classmethod
    def from_xi(cls, xi, x0: float = 1.0, y0: float = 0.0) -> "ModelParams":
        lam, gam, kap, rho, vr, phi, T = (float(v) for v in xi)
        return cls(lam, gam, kap, rho, vr, phi, T, x0=x0, y0=y0)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# kappa=1, gamma=1, rho=1, lambda=0.5, phi=0.1, varrho=10, T=10, x=10, y=0
REFERENCE_PARAMS = ModelParams(lambda_temp=0.5, gamma=1.0, kappa=1.0, rho=1.0, varrho=10.0,
                           phi=0.1, horizon=10.0, x0=10.0, y0=0.0)


def matrix_L(params: ModelParams) -> np.ndarray:
    lam, gam, kap, rho, phi = params.lambda_temp, params.gamma, params.kappa, params.rho, params.phi
    return np.array([
        [0.0, 0.0, -1.0, 0.0],
        [0.0, -rho, gam, 0.0],
        [-phi / lam, kap * rho / (2 * lam), 0.0, rho / (2 * lam)],
        [0.0, 0.0, kap * gam, rho],
    ])


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EigenSystem:
    theta: float
    c1: float
    c2: float
    nu1: float
    nu3: float
    matU: np.ndarray
    matU_inv: np.ndarray
    matD: np.ndarray
    matL: np.ndarray
    # nu1^2 - rho^2 (< 0) and nu3^2 - rho^2 (> 0), computed without cancellation
    a1: float
    a3: float
    uinv_source: str = "explicit"
    # coefficients of each function on the basis (cosh nu1 t, sinh nu1 t, cosh nu3 t, sinh nu3 t)
    row4_coef: np.ndarray = field(repr=False, default=None)
    g_coef: np.ndarray = field(repr=False, default=None)
    # the same functions on the exponential modes exp(d_k t), d = (nu1, -nu1, nu3, -nu3)
    row4_modes: np.ndarray = field(repr=False, default=None)
    g_modes: np.ndarray = field(repr=False, default=None)

    @property
    def growth(self) -> float:
        """Dominant growth rate |nu3| used for scaling."""
        return -self.nu3

    def decomposition_residual(self) -> float:
        rec = self.matU @ self.matD @ self.matU_inv
        return float(np.max(np.abs(self.matL - rec)) / np.max(np.abs(self.matL)))


def _eigenvalues(params: ModelParams) -> tuple[float, ...]:
    lam, gam, kap, rho, phi = params.lambda_temp, params.gamma, params.kappa, params.rho, params.phi
    theta = lam * rho**2 + rho * kap * gam + phi
    c1 = theta / lam
    c2 = math.sqrt((theta - 2 * phi) ** 2 + 4 * phi * rho * kap * gam) / lam
    # nu1^2 nu3^2 = phi rho^2 / lam, so the small root never comes from a difference
    nu3_sq = 0.5 * (c1 + c2)
    nu1_sq = (phi * rho**2 / lam) / nu3_sq
    if not nu1_sq > 0:
        raise NonPositiveDiscriminant(f"c1 - c2 = {2 * nu1_sq!r} is not positive")
    # (nu1^2 - rho^2)(nu3^2 - rho^2) = -rho^3 kappa gamma / lam; take the larger one directly
    s = (phi + rho * kap * gam - lam * rho**2) / lam
    prod = -(rho**3) * kap * gam / lam
    r = math.sqrt(s * s - 4 * prod)
    if s >= 0:
        a3 = 0.5 * (s + r)
        a1 = prod / a3
    else:
        a1 = 0.5 * (s - r)
        a3 = prod / a1
    return theta, c1, c2, -math.sqrt(nu1_sq), -math.sqrt(nu3_sq), a1, a3


def _explicit_U(n1: float, n3: float, rho: float, kg: float, kap: float) -> np.ndarray:
    return np.array([
        [-(n1 - rho) / (kg * n1), -(n1 + rho) / (kg * n1), -(n3 - rho) / (kg * n3), -(n3 + rho) / (kg * n3)],
        [(n1 - rho) / (kap * (n1 + rho)), (n1 + rho) / (kap * (n1 - rho)),
         (n3 - rho) / (kap * (n3 + rho)), (n3 + rho) / (kap * (n3 - rho))],
        [(n1 - rho) / kg, -(n1 + rho) / kg, (n3 - rho) / kg, -(n3 + rho) / kg],
        [1.0, 1.0, 1.0, 1.0],
    ])


def _explicit_U_inv(n1, n3, rho, gam, kap, a1, a3) -> np.ndarray:
    gk = gam * kap
    r2 = rho**2
    kab = kap * a1 * a3
    m = np.array([
        [-2 * gk * n1 * n3**2 * (n1 + rho), -kab, 2 * gk * r2 * (n1 + rho), -a3 * (n1 + rho) ** 2],
        [-2 * gk * n1 * n3**2 * (n1 - rho), -kab, -2 * gk * r2 * (n1 - rho), -a3 * (n1 - rho) ** 2],
        [2 * gk * n1**2 * n3 * (n3 + rho), kab, -2 * gk * r2 * (n3 + rho), a1 * (n3 + rho) ** 2],
        [2 * gk * n1**2 * n3 * (n3 - rho), kab, 2 * gk * r2 * (n3 - rho), a1 * (n3 - rho) ** 2],
    ])
    return m / (4 * r2 * (a1 - a3))


def _row4_coefficients(n1, n3, rho, gam, kap, a1, a3) -> np.ndarray:
    """Rows S41..S44 on the basis (cosh nu1, sinh nu1, cosh nu3, sinh nu3)."""
    den = a1 - a3  # nu1^2 - nu3^2
    r2 = rho**2
    gk = gam * kap
    c = np.zeros((4, 4))
    f = gk * n1 * n3 / (r2 * den)
    c[0] = f * np.array([-n1 * n3, -rho * n3, n1 * n3, rho * n1])
    f = kap * a1 * a3 / (2 * r2 * den)
    c[1] = f * np.array([-1.0, 0.0, 1.0, 0.0])
    f = gk / den
    c[2] = f * np.array([rho, n1, -rho, -n3])
    f = 1.0 / (2 * r2 * den)
    c[3] = f * np.array([-(n1**2 + r2) * a3, -2 * rho * n1 * a3, a1 * (n3**2 + r2), 2 * rho * n3 * a1])
    return c


def _g_coefficients(n1, n3, rho, gam, kap, lam, vr, a1, a3) -> np.ndarray:
    """Rows G1..G4 on the basis (cosh nu1, sinh nu1, cosh nu3, sinh nu3)."""
    den = a1 - a3
    r2 = rho**2
    gk = gam * kap
    c = np.zeros((4, 4))
    f = 1.0 / (2 * lam * r2 * den)
    c[0] = f * np.array([
        2 * vr * n3**2 * a1 + gk * n1**2 * n3**2,
        2 * lam * n1 * n3**2 * a1 - gk * rho * n1 * n3**2,
        -(2 * vr * n1**2 * a3 + gk * n1**2 * n3**2),
        -(2 * lam * n1**2 * n3 * a3 - gk * rho * n1**2 * n3),
    ])
    f = 1.0 / (4 * gam * lam * r2 * n1 * n3 * den)
    c[1] = f * np.array([
        n1 * n3 * a3 * (2 * a1 * (vr - lam * rho) + gk * (n1**2 + r2)),
        -n3 * a3 * (2 * a1 * (vr * rho - lam * n1**2) + 2 * gk * rho * n1**2),
        -n1 * n3 * a1 * (2 * a3 * (vr - lam * rho) + gk * (n3**2 + r2)),
        n1 * a1 * (2 * a3 * (vr * rho - lam * n3**2) + 2 * gk * rho * n3**2),
    ])
    f = 1.0 / (2 * lam * n1 * n3 * den)
    c[2] = f * np.array([
        n1 * n3 * (gk * rho - 2 * lam * a1),
        -n3 * (gk * n1**2 + 2 * vr * a1),
        -n1 * n3 * (gk * rho - 2 * lam * a3),
        n1 * (gk * n3**2 + 2 * vr * a3),
    ])
    f = a1 * a3 / (4 * gk * lam * r2 * n1 * n3 * den)
    k = 2 * vr + gk + 2 * lam * rho
    c[3] = f * np.array([
        n1 * n3 * k,
        2 * n3 * (rho * vr + lam * n1**2),
        -n1 * n3 * k,
        -2 * n1 * (rho * vr + lam * n3**2),
    ])
    return c


def build_eigen_system(params: ModelParams) -> EigenSystem:
    theta, c1, c2, n1, n3, a1, a3 = _eigenvalues(params)
    rho, gam, kap = params.rho, params.gamma, params.kappa
    U = _explicit_U(n1, n3, rho, kap * gam, kap)
    U_inv = _explicit_U_inv(n1, n3, rho, gam, kap, a1, a3)
    source = "explicit"
    if np.max(np.abs(U @ U_inv - np.eye(4))) > UINV_RESIDUAL_TOL:
        try:
            U_inv = np.linalg.inv(U)
        except np.linalg.LinAlgError as exc:
            raise SingularU(str(exc)) from exc
        source = "numeric"
        residual = np.max(np.abs(U @ U_inv - np.eye(4)))
        if not residual <= 1e-6:
            raise SingularU(f"U inversion residual {residual:.3e}")
    row4_coef = _row4_coefficients(n1, n3, rho, gam, kap, a1, a3)
    g_coef = _g_coefficients(n1, n3, rho, gam, kap, params.lambda_temp, params.varrho, a1, a3)
    return EigenSystem(
        theta=theta, c1=c1, c2=c2, nu1=n1, nu3=n3,
        matU=_frozen(U), matU_inv=_frozen(U_inv), matD=_frozen(np.diag([n1, -n1, n3, -n3])),
        matL=_frozen(matrix_L(params)), a1=a1, a3=a3, uinv_source=source,
        row4_coef=_frozen(row4_coef),
        g_coef=_frozen(g_coef),
        row4_modes=_frozen(_to_modes(row4_coef)),
        g_modes=_frozen(_to_modes(g_coef)),
    )


def _to_modes(hyp: np.ndarray) -> np.ndarray:
    """Rewrite rows on (cosh nu1, sinh nu1, cosh nu3, sinh nu3) as rows on exp(+-nu t)."""
    c1, s1, c3, s3 = hyp.T
    return 0.5 * np.stack([c1 + s1, c1 - s1, c3 + s3, c3 - s3], axis=-1)


def scaled_hyperbolic_basis(tau, eig: EigenSystem) -> np.ndarray:
    """(cosh nu1 t, sinh nu1 t, cosh nu3 t, sinh nu3 t) * exp(-|nu3| t), stacked on the last axis."""
    tau = np.asarray(tau, dtype=float)
    m = eig.growth
    p1 = -eig.nu1
    lead = np.exp((p1 - m) * tau)
    e1 = np.exp(-2 * p1 * tau)
    return np.stack([
        0.5 * lead * (1.0 + e1),
        0.5 * lead * np.expm1(-2 * p1 * tau),
        0.5 * (1.0 + np.exp(-2 * m * tau)),
        0.5 * np.expm1(-2 * m * tau),
    ], axis=-1)


def _unscale(scaled: np.ndarray, tau, eig: EigenSystem) -> np.ndarray:
    expo = eig.growth * np.asarray(tau, dtype=float)
    if np.any(expo > MAX_EXPONENT):
        raise OverflowError(f"|nu3|*tau = {np.max(expo):.1f} exceeds {MAX_EXPONENT}; use the scaled evaluators")
    return scaled * np.exp(expo)[..., None]


def S_row4_scaled(tau, eig: EigenSystem) -> np.ndarray:
    return scaled_hyperbolic_basis(tau, eig) @ eig.row4_coef.T


def G_vec_scaled(tau, eig: EigenSystem) -> np.ndarray:
    return scaled_hyperbolic_basis(tau, eig) @ eig.g_coef.T


def S_row4(tau, eig: EigenSystem) -> np.ndarray:
    """(S41, S42, S43, S44) at time-to-go ``tau`` from the closed-form hyperbolic expressions."""
    return _unscale(S_row4_scaled(tau, eig), tau, eig)


def G_vec(tau, eig: EigenSystem, params: ModelParams | None = None) -> np.ndarray:
    """(G1, G2, G3, G4) at time-to-go ``tau``.  ``params`` is accepted for symmetry; eig carries it all."""
    return _unscale(G_vec_scaled(tau, eig), tau, eig)


def expm_S_scaled(tau: float, eig: EigenSystem) -> np.ndarray:
    d = np.diag(eig.matD)
    w = np.exp((d - eig.growth) * tau)
    return (eig.matU * w) @ eig.matU_inv


def expm_S(tau: float, eig: EigenSystem) -> np.ndarray:
    """exp(L tau) as U exp(D tau) U^-1."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if eig.growth * tau > MAX_EXPONENT:
        raise OverflowError(f"|nu3|*tau = {eig.growth * tau:.1f} exceeds {MAX_EXPONENT}")
    d = np.diag(eig.matD)
    return (eig.matU * np.exp(d * tau)) @ eig.matU_inv


def log_S44(tau, eig: EigenSystem) -> np.ndarray:
    """log S44(tau) without overflow (S44 >= 1 so the log is defined)."""
    return np.log(S_row4_scaled(tau, eig)[..., 3]) + eig.growth * np.asarray(tau, dtype=float)


def log_neg_G3(tau, eig: EigenSystem) -> np.ndarray:
    """log(-G3(tau)); G3 <= -1 on the horizon."""
    return np.log(-G_vec_scaled(tau, eig)[..., 2]) + eig.growth * np.asarray(tau, dtype=float)


# Two-by-two minors.  Every quantity the feedback law needs is a ratio of
# expressions f(tau) g(sigma) - h(tau) k(sigma) with f, g, h, k taken from the
# rows of S and G.  Within one eigenmode, S_4j and G_j are both multiples of
# U^-1[k, j], so the k == l (same-mode) products cancel exactly; the leading
# exp(2|nu3| tau) growth of G3 S44 and G4 S43 is one of them.  Dropping those
# terms analytically instead of subtracting two huge floats is what keeps the
# gap, v0*v1, v0*v2 and the signal kernel accurate at any horizon.

_OFF_DIAGONAL = [(k, l) for k in range(4) for l in range(4) if k != l]


def _mode_rates(eig: EigenSystem) -> np.ndarray:
    return np.array([eig.nu1, -eig.nu1, eig.nu3, -eig.nu3])


def minor_scaled(eig: EigenSystem, f, g, h, k, tau, sigma=None) -> np.ndarray:
    """f(tau) g(sigma) - h(tau) k(sigma) times exp(-(|nu1| + |nu3|) tau), same-mode terms removed.

    ``f, g, h, k`` are mode-coefficient 4-vectors.  Bounded for 0 <= sigma <= tau.
    """
    tau = np.asarray(tau, dtype=float)
    sigma = tau if sigma is None else np.asarray(sigma, dtype=float)
    d = _mode_rates(eig)
    top = -eig.nu1 - eig.nu3
    out = np.zeros(np.broadcast(tau, sigma).shape)
    for a, b in _OFF_DIAGONAL:
        c = f[a] * g[b] - h[a] * k[b]
        if c != 0.0:
            out = out + c * np.exp((d[a] - top) * tau + d[b] * sigma)
    return out


def gap_scaled(tau, eig: EigenSystem) -> np.ndarray:
    """(G3 S44 - G4 S43)(tau) * exp(-(|nu1| + |nu3|) tau)."""
    S, G = eig.row4_modes, eig.g_modes
    return minor_scaled(eig, G[2], S[3], G[3], S[2], tau)


def log_abs_gap(tau, eig: EigenSystem) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(gap_scaled(tau, eig))) + (-eig.nu1 - eig.nu3) * np.asarray(tau, dtype=float)


def assumption_gap(tau, eig: EigenSystem) -> np.ndarray:
    """G3 S44 - G4 S43 at time-to-go ``tau`` (-1 at tau=0)."""
    expo = (-eig.nu1 - eig.nu3) * np.asarray(tau, dtype=float)
    if np.any(expo > MAX_EXPONENT):
        raise OverflowError("gap overflows at this horizon; use log_abs_gap")
    return gap_scaled(tau, eig) * np.exp(expo)


def normalized_gap(tau, eig: EigenSystem) -> np.ndarray:
    """1 - (G4/G3)(S43/S44) = gap / (G3 S44), the reciprocal of v0.

    Decays like exp(-(|nu3| - |nu1|) tau) by construction; it is small for long
    horizons without the assumption being anywhere near violated.
    """
    s = S_row4_scaled(tau, eig)
    g = G_vec_scaled(tau, eig)
    tau = np.asarray(tau, dtype=float)
    return gap_scaled(tau, eig) / (g[..., 2] * s[..., 3]) * np.exp((eig.nu3 - eig.nu1) * tau)


@dataclass(frozen=True)
class Coefficients:
    """Feedback coefficients at one or more times-to-go.

    ``v0`` may be huge (it grows like exp((|nu3| - |nu1|) tau)); the law itself
    only ever uses the bounded products ``v0v1`` and ``v0v2``.
    """

    v0: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    v0v1: np.ndarray
    v0v2: np.ndarray
    s_ratio: np.ndarray  # (..., 4): S4j / S44


@dataclass(frozen=True)
class CoefficientSet:
    params: ModelParams
    eig: EigenSystem
    floor: float = DEFAULT_FLOOR

    def gap_ok(self, tau) -> np.ndarray:
        return log_abs_gap(tau, self.eig) > math.log(self.floor)

    def __call__(self, tau) -> Coefficients:
        eig = self.eig
        tau = np.asarray(tau, dtype=float)
        if not np.all(self.gap_ok(tau)):
            worst = float(np.exp(np.min(log_abs_gap(tau, eig))))
            raise AssumptionViolated(f"|G3 S44 - G4 S43| = {worst:.3e} below floor {self.floor:g}")
        S, G = eig.row4_modes, eig.g_modes
        s = S_row4_scaled(tau, eig)
        g = G_vec_scaled(tau, eig)
        gap = gap_scaled(tau, eig)
        m14 = minor_scaled(eig, G[0], S[3], G[3], S[0], tau)
        m24 = minor_scaled(eig, G[1], S[3], G[3], S[1], tau)
        g3s44 = g[..., 2] * s[..., 3]
        # gap / (G3 S44) carries exp(-(|nu3| - |nu1|) tau) relative to the scaled ratio
        shrink = np.exp((eig.nu3 - eig.nu1) * tau)
        with np.errstate(over="ignore"):
            v0 = g3s44 / gap / shrink
        return Coefficients(
            v0=v0,
            v1=-m14 / g3s44 * shrink,
            v2=-m24 / g3s44 * shrink,
            v3=g[..., 3] / g[..., 2],
            v0v1=-m14 / gap,
            v0v2=-m24 / gap,
            s_ratio=s / s[..., 3:4],
        )

    def signal_kernel(self, tau, sigma) -> np.ndarray:
        """(G4(tau) S43(sigma) - S44(tau) G3(sigma)) / (G3 S44 - G4 S43)(tau) for sigma <= tau.

        The signal intercept is E_t[int_t^T kernel(T-t, T-s) dA_s] / (2 lambda);
        kernel(tau, tau) = -1.
        """
        eig = self.eig
        S, G = eig.row4_modes, eig.g_modes
        num = minor_scaled(eig, G[3], S[2], S[3], G[2], tau, sigma)
        return num / gap_scaled(tau, eig)

    def row4_kernel(self, tau, sigma) -> np.ndarray:
        """S43(sigma) / S44(tau) for sigma <= tau (the adjoint representation weight)."""
        eig = self.eig
        s_sig = S_row4_scaled(sigma, eig)[..., 2]
        s_tau = S_row4_scaled(tau, eig)[..., 3]
        return s_sig / s_tau * np.exp(eig.growth * (np.asarray(sigma, dtype=float) - np.asarray(tau, dtype=float)))


def v_coeffs(tau, params: ModelParams, eig: EigenSystem | None = None,
             floor: float = DEFAULT_FLOOR) -> tuple:
    eig = eig if eig is not None else build_eigen_system(params)
    c = CoefficientSet(params, eig, floor)(tau)
    return c.v0, c.v1, c.v2, c.v3


@dataclass(frozen=True)
class AssumptionCheck:
    holds: bool
    min_gap: float
    tau_at_min: float


def check_assumption(params: ModelParams, grid_n: int = 1001, floor: float = DEFAULT_FLOOR,
                     eig: EigenSystem | None = None) -> AssumptionCheck:
    """Evaluate |G3 S44 - G4 S43| on a uniform time-to-go grid over [0, T].

    A sign change between grid nodes also counts as a violation (reported as gap 0).
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    eig = eig if eig is not None else build_eigen_system(params)
    tau = np.linspace(0.0, params.horizon, grid_n)
    scaled = gap_scaled(tau, eig)
    log_gap = log_abs_gap(tau, eig)
    log_gap = np.where(np.isfinite(log_gap), log_gap, -np.inf)
    k = int(np.argmin(log_gap))
    min_gap = float(np.exp(log_gap[k]))
    sign_flip = np.flatnonzero(np.sign(scaled) != np.sign(scaled[0]))
    if sign_flip.size:
        k = int(sign_flip[0])
        min_gap = 0.0
    return AssumptionCheck(holds=bool(min_gap > floor), min_gap=min_gap, tau_at_min=float(tau[k]))


@dataclass
class SweepReport:
    samples: int
    failures: list = field(default_factory=list)  # (xi, min_gap) pairs
    min_gap: float = math.inf

    @property
    def n_failures(self) -> int:
        return len(self.failures)


def sample_box(box_lo, box_hi, samples: int, seed: int) -> np.ndarray:
    """Uniform samples in the half-open box (lo, hi], so lo = 0 is admissible."""
    lo = np.asarray(box_lo, dtype=float)
    hi = np.asarray(box_hi, dtype=float)
    if lo.shape != (7,) or hi.shape != (7,):
        raise ValueError("box bounds must be 7-vectors (lambda, gamma, kappa, rho, varrho, phi, T)")
    if np.any(lo < 0) or np.any(hi < lo) or np.any(hi <= 0):
        raise ValueError("need 0 <= lo <= hi and hi > 0 componentwise")
    rng = np.random.default_rng(seed)
    return hi - (hi - lo) * rng.random((samples, 7))


def sweep_assumption(box_lo, box_hi, samples: int, seed: int, grid_n: int = 1001,
                     floor: float = DEFAULT_FLOOR) -> SweepReport:
    report = SweepReport(samples=samples)
    for xi in sample_box(box_lo, box_hi, samples, seed):
        try:
            chk = check_assumption(ModelParams.from_xi(xi), grid_n, floor)
            gap, ok = chk.min_gap, chk.holds
        except ModelError:
            gap, ok = 0.0, False
        report.min_gap = min(report.min_gap, gap)
        if not ok:
            report.failures.append((tuple(float(v) for v in xi), gap))
    return report
