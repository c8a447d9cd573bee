"""Self-consistent large-N saddle-point (Schwinger-Dyson) solver on the
Matsubara grid, plus the large-N free energy and entropy.

Grid conventions: 2M fermionic frequencies w_n = (2n+1) pi / beta for
n = -M..M-1 (stored ascending), and 2M midpoint imaginary times
tau_j = (j + 1/2) beta / (2M) in [0, beta). The discrete transforms below are
exact inverses of each other; the slowly decaying free part 1/(i w + mu) is
transformed analytically and only the remainder goes through the FFT.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError


@dataclass(frozen=True)
class SdConfig:
    mixing: float = 0.3
    tolerance: float = 1e-10
    max_iterations: int = 5000
    grid_half_size: int | None = None  # None: 2^14 up to beta J = 200, then ~beta J
    tail_mode: str = "free"            # "free": analytic transform of 1/(i w + mu)

    def __post_init__(self):
        if not 0.0 < self.mixing <= 1.0:
            raise ValueError("mixing must lie in (0, 1]")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


def resolve_grid_half_size(config: SdConfig, beta: float, j_scale: float) -> int:
    if config.grid_half_size is not None:
        return config.grid_half_size
    m = 1 << 14
    bj = beta * j_scale
    while bj > 200.0:
        m *= 2
        bj /= 2.0
    return m


@dataclass(frozen=True)
class MatsubaraGreen:
    """Converged G and Sigma on the symmetric Matsubara grid and its tau grid."""

    beta: float
    grid_half_size: int
    j_scale: float
    mu: float
    omega: np.ndarray = field(repr=False)
    g_iw: np.ndarray = field(repr=False)
    sigma_iw: np.ndarray = field(repr=False)
    tau: np.ndarray = field(repr=False)
    g_tau: np.ndarray = field(repr=False)
    sigma_tau: np.ndarray = field(repr=False)
    iterations: int = 0
    residual: float = np.nan

    def conjugation_defect(self) -> float:
        """max |G(i w_{-n-1}) - conj(G(i w_n))|."""
        return float(np.abs(self.g_iw[::-1] - self.g_iw.conj()).max())

    def tail_defect(self) -> float:
        """|i w G - 1| at the top of the grid."""
        return float(abs(1j * self.omega[-1] * self.g_iw[-1] - 1.0))


def matsubara_frequencies(beta: float, m: int) -> np.ndarray:
    n = np.arange(-m, m)
    return (2 * n + 1) * np.pi / beta


def tau_grid(beta: float, m: int) -> np.ndarray:
    k = 2 * m
    return (np.arange(k) + 0.5) * beta / k


def freq_to_tau(values: np.ndarray, beta: float) -> np.ndarray:
    """G(tau_j) = (1/beta) sum_n G(i w_n) exp(-i w_n tau_j), exact on the grid pair."""
    k = len(values)
    j = np.arange(k)
    pre = np.exp(-1j * np.pi * j / k)
    post = np.exp(1j * np.pi * (k - 1) * (2 * j + 1) / (2 * k))
    return post * np.fft.fft(values * pre) / beta


def tau_to_freq(values: np.ndarray, beta: float) -> np.ndarray:
    """Inverse of freq_to_tau: G(i w_n) = (beta/2M) sum_j G(tau_j) exp(i w_n tau_j)."""
    k = len(values)
    j = np.arange(k)
    post = np.exp(1j * np.pi * (k - 1) * (2 * j + 1) / (2 * k))
    pre = np.exp(-1j * np.pi * j / k)
    return beta * np.conj(pre) * np.fft.ifft(values * np.conj(post))


def free_g_iw(omega: np.ndarray, mu: float) -> np.ndarray:
    return 1.0 / (1j * omega + mu)


def free_g_tau(tau: np.ndarray, beta: float, mu: float) -> np.ndarray:
    """-e^{mu tau} / (1 + e^{beta mu}) on (0, beta), overflow-safe."""
    # write as -exp(mu tau - softplus(beta mu)) with softplus(x) = max(x,0) + log1p(e^{-|x|})
    soft = max(beta * mu, 0.0) + np.log1p(np.exp(-abs(beta * mu)))
    return -np.exp(mu * tau - soft) + 0.0j


def g_iw_to_tau(g_iw: np.ndarray, beta: float, mu: float) -> np.ndarray:
    """Frequency-to-tau with the free tail handled analytically."""
    omega = matsubara_frequencies(beta, len(g_iw) // 2)
    rest = g_iw - free_g_iw(omega, mu)
    return free_g_tau(tau_grid(beta, len(g_iw) // 2), beta, mu) + freq_to_tau(rest, beta)


def _symmetrize(values: np.ndarray) -> np.ndarray:
    # enforce G(i w_{-n-1}) = conj(G(i w_n)) exactly at every iterate
    return 0.5 * (values + values[::-1].conj())


def solve_sd(j_scale: float, mu: float, beta: float, config: SdConfig = SdConfig()) -> MatsubaraGreen:
    """Fixed point of G(iw) = 1/(iw + mu - Sigma(iw)), Sigma(tau) = -J^2 G^2(tau) G(-tau).

    Iteration: Dyson step in frequency, transform to tau (free tail analytic),
    self-energy in tau with G(-tau) = -G(beta - tau), transform back, linear
    mixing. Raises ConvergenceError when the residual stalls above tolerance or
    the update produces NaNs (try a smaller mixing parameter then).
    """
    if beta * j_scale > 1e4:
        raise ValueError("beta*J above 1e4 is out of the supported range")
    m = resolve_grid_half_size(config, beta, j_scale)
    if m < 2 ** 8:
        raise ValueError("grid_half_size below 2^8 is not meaningful here")
    omega = matsubara_frequencies(beta, m)
    tau = tau_grid(beta, m)
    g0 = free_g_iw(omega, mu)
    g = g0.copy()
    j_sq = j_scale * j_scale
    residuals = []
    stall_count = 0
    g_tau = sigma_tau = sigma_iw = np.zeros_like(g)
    for it in range(1, config.max_iterations + 1):
        g_tau = g_iw_to_tau(g, beta, mu)
        g_mtau = -g_tau[::-1]                      # G(-tau) = -G(beta - tau)
        sigma_tau = -j_sq * g_tau * g_tau * g_mtau
        sigma_iw = _symmetrize(tau_to_freq(sigma_tau, beta))
        g_new = 1.0 / (1j * omega + mu - sigma_iw)
        if np.isnan(g_new).any():
            raise ConvergenceError(
                f"NaN in Dyson update at iteration {it}; reduce mixing below "
                f"{config.mixing}", residuals)
        res = float(np.abs(g_new - g).max())
        residuals.append(res)
        if res < config.tolerance:
            g = g_new  # already Dyson-consistent with sigma_iw
            break
        g = _symmetrize(config.mixing * g_new + (1.0 - config.mixing) * g)
        # documented contract: the residual decreases monotonically after the
        # first iterations; persistent growth means the iteration is diverging
        if it > 10 and res > residuals[-2] * (1.0 + 1e-9):
            stall_count += 1
            if stall_count > 25:
                raise ConvergenceError(
                    f"residual growing for {stall_count} consecutive iterations "
                    f"(now {res:.3e}); reduce mixing below {config.mixing}", residuals)
        else:
            stall_count = 0
    else:
        raise ConvergenceError(
            f"no fixed point within {config.max_iterations} iterations "
            f"(residual {residuals[-1]:.3e})", residuals)
    return MatsubaraGreen(beta, m, j_scale, mu, omega, g, sigma_iw, tau,
                          g_tau, sigma_tau, iterations=it, residual=residuals[-1])


# -- free energy and entropy --------------------------------------------------------

def free_energy_largen(sol: MatsubaraGreen) -> float:
    """F/N = F0/N + (1/beta) sum_n log[G/G0] - (3/(4 beta)) sum_n Sigma G.

    The log-sum is regularized by the free solution; F0/N is the closed-form
    grand potential of a free level at -mu.
    """
    if not np.isfinite(sol.residual):
        raise ValueError("unconverged solution")
    beta, mu = sol.beta, sol.mu
    g0 = free_g_iw(sol.omega, mu)
    soft = max(beta * mu, 0.0) + np.log1p(np.exp(-abs(beta * mu)))
    f0 = -soft / beta
    log_term = np.log(sol.g_iw / g0).sum()
    sigma_term = (sol.sigma_iw * sol.g_iw).sum()
    f = f0 + (log_term / beta - 0.75 * sigma_term / beta)
    if abs(f.imag) > 1e-8:
        raise ValueError(f"free energy has imaginary part {f.imag:.2e}")
    return float(f.real)


def entropy_at(j_scale: float, mu: float, temperature: float,
               config: SdConfig = SdConfig(), rel_step: float = 0.01) -> float:
    """S/N = -dF/dT by a central difference at fixed relative step.

    The Matsubara grid size is resolved once at the stencil center; letting it
    switch between the two evaluations would leak the discretization jump into
    the derivative.
    """
    dt = rel_step * temperature
    pinned = replace(config, grid_half_size=resolve_grid_half_size(
        config, 1.0 / (temperature - dt), j_scale))
    f_hi = free_energy_largen(solve_sd(j_scale, mu, 1.0 / (temperature + dt), pinned))
    f_lo = free_energy_largen(solve_sd(j_scale, mu, 1.0 / (temperature - dt), pinned))
    return -(f_hi - f_lo) / (2 * dt)


def entropy_curve_largen(j_scale: float, mu: float, t_grid, config: SdConfig = SdConfig()):
    """ThermoCurve over t_grid; central differences inside, one-sided at the ends."""
    from .spectral import ThermoCurve

    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) < 5:
        raise ValueError("need at least 5 temperatures for the derivative stencil")
    if (np.diff(t_grid) <= 0).any():
        raise ValueError("temperature grid must be strictly increasing")
    # one grid size for the whole curve, resolved at the coldest point
    pinned = replace(config, grid_half_size=resolve_grid_half_size(
        config, 1.0 / t_grid[0], j_scale))
    f = np.array([free_energy_largen(solve_sd(j_scale, mu, 1.0 / t, pinned))
                  for t in t_grid])
    s = np.empty_like(f)
    s[1:-1] = -(f[2:] - f[:-2]) / (t_grid[2:] - t_grid[:-2])
    s[0] = -(f[1] - f[0]) / (t_grid[1] - t_grid[0])
    s[-1] = -(f[-1] - f[-2]) / (t_grid[-1] - t_grid[-2])
    return ThermoCurve(t_grid, f, s, f + t_grid * s)


def conformal_tau_slope(sol: MatsubaraGreen, window=(None, None)) -> float:
    """Slope of ln|G(tau)| vs ln tau on 1/J << tau << beta/2.

    Defaults to the window [10/J, beta/10].
    """
    lo = window[0] if window[0] is not None else 10.0 / sol.j_scale
    hi = window[1] if window[1] is not None else sol.beta / 10.0
    mask = (sol.tau >= lo) & (sol.tau <= hi)
    if mask.sum() < 10:
        raise ValueError(f"fit window [{lo:.3g}, {hi:.3g}] holds fewer than 10 grid points")
    x = np.log(sol.tau[mask])
    y = np.log(np.abs(sol.g_tau[mask].real))
    return float(np.polyfit(x, y, 1)[0])


# -- CSV emitters -------------------------------------------------------------------

def write_sd_green_csv(path, sol: MatsubaraGreen):
    from .spectral import _write_csv

    n_idx = np.arange(-sol.grid_half_size, sol.grid_half_size)
    _write_csv(path, ["n", "omega_n", "re_G", "im_G", "re_Sigma", "im_Sigma"],
               [n_idx, map(float, sol.omega),
                (float(x) for x in sol.g_iw.real), (float(x) for x in sol.g_iw.imag),
                (float(x) for x in sol.sigma_iw.real), (float(x) for x in sol.sigma_iw.imag)])


def write_sd_entropy_csv(path, curve):
    from .spectral import _write_csv

    _write_csv(path, ["T", "F_per_site", "S_per_site"],
               [map(float, curve.temperatures), map(float, curve.free_energy_per_site),
                map(float, curve.entropy_per_site)])
