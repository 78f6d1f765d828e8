"""Exact analysis of finite ergodic Markov chains.

Everything here is deterministic dense linear algebra on row-stochastic
matrices: stationary distributions, spectra, mixing times, pointwise and
average mutual information between consecutive states, and the
ratio-convergence witness that ties the contrastive ratio model to the
stationary one.  All functions are pure; matrices are plain float64
ndarrays validated on entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROW_SUM_TOL = 1e-12


class ErgodicityError(ValueError):
    """A chain failed the positivity-of-some-power ergodicity check."""


class EigenSolverError(RuntimeError):
    """The dense eigenvalue solve did not converge."""


class MixingTimeCapError(RuntimeError):
    """Total-variation distance did not drop below eps within the cap."""


class RatioConvergenceError(AssertionError):
    """The ratio-model deviation bound was violated at some (s, s', t)."""


def validate_transition_matrix(T) -> np.ndarray:
    T = np.asarray(T, dtype=np.float64)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError(f"transition matrix must be square, got shape {T.shape}")
    if T.shape[0] < 1:
        raise ValueError("transition matrix must have at least one state")
    if np.any(T < 0.0) or np.any(T > 1.0):
        raise ValueError("transition matrix entries must lie in [0, 1]")
    row_err = np.max(np.abs(T.sum(axis=1) - 1.0))
    if row_err > ROW_SUM_TOL:
        raise ValueError(f"rows must sum to 1 within {ROW_SUM_TOL}, worst error {row_err:g}")
    return T


def validate_distribution(p, n_states: int | None = None) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError(f"distribution must be a vector, got shape {p.shape}")
    if n_states is not None and p.shape[0] != n_states:
        raise ValueError(f"distribution has {p.shape[0]} states, expected {n_states}")
    if np.any(p < 0.0):
        raise ValueError("distribution entries must be nonnegative")
    if abs(p.sum() - 1.0) > ROW_SUM_TOL:
        raise ValueError(f"distribution must sum to 1 within {ROW_SUM_TOL}")
    return p


def random_walk_chain(K: int, alpha: float) -> np.ndarray:
    """Biased random walk on {0..K-1}: right with prob alpha, left otherwise.

    The first state stays put with prob 1-alpha, the last with prob alpha.
    """
    if K < 2:
        raise ValueError(f"need K >= 2 states, got {K}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    T = np.zeros((K, K))
    T[0, 0] = 1.0 - alpha
    T[0, 1] = alpha
    T[K - 1, K - 1] = alpha
    T[K - 1, K - 2] = 1.0 - alpha
    for i in range(1, K - 1):
        T[i, i + 1] = alpha
        T[i, i - 1] = 1.0 - alpha
    return T


def random_walk_stationary_closed_form(K: int, alpha: float) -> np.ndarray:
    """Stationary distribution rho(i) = r^i (1-r) / (1 - r^K) with r = alpha/(1-alpha).

    The symmetric walk (alpha = 0.5, r = 1) degenerates to the uniform
    distribution, handled as a separate branch.
    """
    if K < 2:
        raise ValueError(f"need K >= 2 states, got {K}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if alpha == 0.5:
        return np.full(K, 1.0 / K)
    r = alpha / (1.0 - alpha)
    i = np.arange(K)
    rho = np.power(r, i) * (1.0 - r) / (1.0 - r**K)
    return rho / rho.sum()


def check_ergodic(T: np.ndarray, max_power: int | None = None) -> None:
    """Raise ErgodicityError unless some power of T up to max_power is all-positive.

    Uses boolean reachability with repeated squaring; the default cap is the
    Wielandt primitivity bound n^2 - 2n + 2.
    """
    T = validate_transition_matrix(T)
    n = T.shape[0]
    if max_power is None:
        max_power = max(1, n * n - 2 * n + 2)
    A = T > 0.0
    power = 1
    while True:
        if A.all():
            return
        if power >= max_power:
            i, j = np.argwhere(~A)[0]
            raise ErgodicityError(
                "chain failed the ergodicity check: no power of T up to "
                f"{max_power} has all-positive entries (T^{power} is zero at "
                f"({i}, {j}))"
            )
        A = A @ A
        power *= 2


def stationary_distribution(T: np.ndarray, tol: float = 1e-12, max_power: int | None = None) -> np.ndarray:
    """Principal left eigenvector of T, normalized to a distribution.

    Solved densely (rho (T - I) = 0 with the sum-to-one constraint) and
    verified to satisfy ||rho T - rho||_1 <= tol.
    """
    T = validate_transition_matrix(T)
    check_ergodic(T, max_power=max_power)
    n = T.shape[0]
    A = np.vstack([T.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    rho, *_ = np.linalg.lstsq(A, b, rcond=None)
    rho = np.maximum(rho, 0.0)
    rho = rho / rho.sum()
    residual = float(np.abs(rho @ T - rho).sum())
    if residual > tol:
        raise EigenSolverError(
            f"stationary solve residual {residual:g} exceeds tol {tol:g}"
        )
    return rho


def marginal(p0: np.ndarray, T: np.ndarray, t: int) -> np.ndarray:
    """State distribution after t steps: p0 @ T^t (Chapman-Kolmogorov)."""
    T = validate_transition_matrix(T)
    p = validate_distribution(p0, T.shape[0])
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    for _ in range(t):
        p = p @ T
    return p


@dataclass(frozen=True)
class SpectralSummary:
    lambda1: float
    lambda2_mod: float
    gap: float


def spectral_summary(T: np.ndarray) -> SpectralSummary:
    """Eigenvalues sorted by modulus; gap = 1 - |lambda_2|.

    lambda_2 is compared by modulus since non-reversible chains can have
    complex eigenvalue pairs.
    """
    T = validate_transition_matrix(T)
    try:
        eig = np.linalg.eigvals(T)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(
            f"dense eigensolve failed after LAPACK's internal QR iteration "
            f"limit (~30n = {30 * T.shape[0]}): {exc}"
        ) from exc
    order = np.argsort(-np.abs(eig))
    eig = eig[order]
    lambda1 = float(np.real(eig[0]))
    lambda2_mod = float(np.abs(eig[1])) if eig.shape[0] > 1 else 0.0
    return SpectralSummary(lambda1=lambda1, lambda2_mod=lambda2_mod, gap=1.0 - lambda2_mod)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """TV distance, half the l1 norm."""
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def mixing_time(T: np.ndarray, eps: float, cap: int = 100_000) -> int:
    """Smallest t >= 1 with max over one-hot starts of TV(p0 T^t, rho) <= eps."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    T = validate_transition_matrix(T)
    rho = stationary_distribution(T)
    M = T.copy()
    for t in range(1, cap + 1):
        worst = 0.5 * float(np.abs(M - rho[None, :]).sum(axis=1).max())
        if worst <= eps:
            return t
        M = M @ T
    raise MixingTimeCapError(
        f"TV still {worst:g} > eps {eps:g} after cap {cap} steps"
    )


@dataclass(frozen=True)
class RatioModel:
    """Dense table of log-ratio (or ratio) values with a support mask.

    Entries off the support carry -inf sentinels and are excluded from any
    expectation (the 0 log 0 = 0 convention).
    """

    values: np.ndarray
    support: np.ndarray

    def finite_values(self) -> np.ndarray:
        return self.values[self.support]


def pmi_matrix(T: np.ndarray, marg: np.ndarray) -> RatioModel:
    """Pointwise mutual information log T(s, s') - log marg(s')."""
    T = validate_transition_matrix(T)
    marg = validate_distribution(marg, T.shape[0])
    if np.any(marg <= 0.0):
        raise ValueError("marginal must be strictly positive everywhere")
    support = T > 0.0
    values = np.full_like(T, -np.inf)
    values[support] = np.log(T[support]) - np.log(np.broadcast_to(marg, T.shape)[support])
    return RatioModel(values=values, support=support)


def limiting_ratio(T: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """The stationary ratio table T(s, s') / rho(s')."""
    T = validate_transition_matrix(T)
    rho = validate_distribution(rho, T.shape[0])
    return T / rho[None, :]


def mi_consecutive(T: np.ndarray, p0: np.ndarray, t: int) -> float:
    """Exact mutual information between S_t and S_{t+1} started from p0.

    Finite double sum of p_t(s) T(s,s') [log T(s,s') - log p_{t+1}(s')],
    with 0 log 0 terms dropped.
    """
    T = validate_transition_matrix(T)
    pt = marginal(p0, T, t)
    pt1 = pt @ T
    joint = pt[:, None] * T
    mask = joint > 0.0
    with np.errstate(divide="ignore"):
        terms = np.where(mask, joint * (np.log(np.where(mask, T, 1.0)) - np.log(np.where(pt1[None, :] > 0, pt1[None, :], 1.0))), 0.0)
    return float(terms.sum())


def mdp_to_chain(mdp_kernel: np.ndarray, policy: np.ndarray) -> np.ndarray:
    """Average the per-action kernels under the policy: sum_a pi(a|s) T(s,a,s').

    mdp_kernel has shape (n_actions, n_states, n_states); policy has shape
    (n_states, n_actions) with stochastic rows.
    """
    kernel = np.asarray(mdp_kernel, dtype=np.float64)
    pol = np.asarray(policy, dtype=np.float64)
    if kernel.ndim != 3 or kernel.shape[1] != kernel.shape[2]:
        raise ValueError(f"kernel stack must be (n_actions, n, n), got {kernel.shape}")
    if pol.shape != (kernel.shape[1], kernel.shape[0]):
        raise ValueError(
            f"policy shape {pol.shape} does not match kernel stack {kernel.shape}"
        )
    if np.max(np.abs(pol.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
        raise ValueError("policy rows must sum to 1")
    T = np.einsum("sa,ast->st", pol, kernel)
    return validate_transition_matrix(T)


@dataclass(frozen=True)
class Prop1Report:
    t_star: int
    max_deviation: float
    eps: float
    window: int


def prop1_witness(
    T: np.ndarray,
    eps: float,
    p0: np.ndarray,
    window: int = 8,
    mixing_cap: int = 100_000,
) -> Prop1Report:
    """Deterministic core of the ratio-convergence argument.

    Computes t* = mixing_time(T, eps/2 * min_x rho(x)^2) and checks, for all
    t in [t*, t* + window) and all (s, s') with T(s, s') > 0, that
    |T(s,s')/p_{t+1}(s') - T(s,s')/rho(s')| <= eps.  Raises
    RatioConvergenceError naming the worst violating (s, s', t) otherwise.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    T = validate_transition_matrix(T)
    p0 = validate_distribution(p0, T.shape[0])
    rho = stationary_distribution(T)
    threshold = 0.5 * eps * float(rho.min()) ** 2
    t_star = mixing_time(T, threshold, cap=mixing_cap)
    support = T > 0.0
    nu_inf = np.where(support, T / rho[None, :], 0.0)
    p = marginal(p0, T, t_star + 1)
    max_dev = 0.0
    worst = None
    for t in range(t_star, t_star + window):
        if np.any(p <= 0.0):
            raise RatioConvergenceError(f"marginal at t={t + 1} has a zero entry")
        nu_t = np.where(support, T / p[None, :], 0.0)
        dev = np.abs(nu_t - nu_inf)
        dev[~support] = 0.0
        idx = np.unravel_index(np.argmax(dev), dev.shape)
        if dev[idx] > max_dev:
            max_dev = float(dev[idx])
            worst = (int(idx[0]), int(idx[1]), t)
        p = p @ T
    if max_dev > eps:
        s, s2, t = worst
        raise RatioConvergenceError(
            f"deviation {max_dev:g} > eps {eps:g} at (s={s}, s'={s2}, t={t})"
        )
    return Prop1Report(t_star=t_star, max_deviation=max_dev, eps=eps, window=window)


def save_matrix(path, M: np.ndarray) -> None:
    """Dump a matrix (or vector, written as one row) as CSV with a `# rows cols` header."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[None, :]
    if M.ndim != 2:
        raise ValueError(f"only 1-D or 2-D arrays supported, got shape {M.shape}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {M.shape[0]} {M.shape[1]}\n")
        for row in M:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError(f"missing '# rows cols' header in {path}")
        rows, cols = (int(x) for x in header[1:].split())
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (rows, cols):
        raise ValueError(f"header says {(rows, cols)} but data is {data.shape}")
    return data
