"""Blind source separation: centering, whitening, FastICA and Infomax.

The estimation pipeline is the classic one for linear instantaneous
mixtures ``x = A s``: remove per-channel means, whiten to unit
covariance, then search for the orthogonal rotation that maximizes
non-Gaussianity (FastICA) or output entropy (Infomax). The composite
unmixing matrix ``W = rotation @ whitener`` recovers source time courses
as ``s = W (x - means)``, and its pseudo-inverse plays the role of the
estimated mixing matrix for reconstruction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .recording import Recording

MAX_WEIGHT = 1e8  # Infomax divergence guard
SMALL_ANGLE_PASSES = 10  # Infomax plateau detector, after the toolbox small-angle rule

FASTICA_DEFLATION = "fastica_deflation"
FASTICA_PARALLEL = "fastica_parallel"
INFOMAX = "infomax"
ALGORITHMS = (FASTICA_DEFLATION, FASTICA_PARALLEL, INFOMAX)


@dataclass
class MixingModel:
    """Ground-truth linear mixture ``x = A s`` for synthetic data.

    A is channels x sources, s is sources x samples, and x is stored as
    the exact product so oracle tests can rely on the identity bit-wise.
    """

    A: np.ndarray
    s: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=np.float64)
        self.s = np.asarray(self.s, dtype=np.float64)
        self.x = np.asarray(self.x, dtype=np.float64)
        if np.linalg.matrix_rank(self.A) < self.A.shape[1]:
            raise ValueError("mixing matrix must have full column rank")


@dataclass
class IcaOptions:
    """Tuning knobs shared by both algorithms.

    ``mode`` selects the FastICA update scheme and is ignored by
    Infomax. ``learning_rate`` (Infomax only) defaults to
    ``0.01 / ln(n_components)`` when left as None. ``max_iterations``
    defaults to 200 fixed-point iterations per component for FastICA and
    500 data passes for Infomax.
    """

    mode: str = "deflation"
    max_iterations: int | None = None
    tolerance: float = 1e-4
    learning_rate: float | None = None
    anneal_factor: float = 0.9
    anneal_threshold: float = 60.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("deflation", "parallel"):
            raise ValueError(f"mode must be 'deflation' or 'parallel', got {self.mode!r}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")

    def resolved_max_iterations(self, algorithm: str) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return 500 if algorithm == INFOMAX else 200

    def resolved_learning_rate(self, n_components: int) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 0.01 / math.log(max(n_components, 2))


@dataclass
class IcaModel:
    """Fitted unmixing model.

    ``W = rotation @ whitener`` maps centered channel data to component
    time courses; ``A_hat`` is its pseudo-inverse (the estimated mixing
    matrix), so ``W @ A_hat`` is the identity on components.
    """

    means: np.ndarray
    whitener: np.ndarray
    rotation: np.ndarray
    W: np.ndarray
    A_hat: np.ndarray
    n_components: int
    algorithm: str
    iterations_used: int
    converged: bool
    channel_labels: list = field(default_factory=list)

    def __post_init__(self):
        r = self.rotation
        if np.max(np.abs(r.T @ r - np.eye(r.shape[1]))) > 1e-8:
            raise ValueError("rotation is not orthogonal")
        if np.max(np.abs(self.W @ self.A_hat - np.eye(self.n_components))) > 1e-8:
            raise ValueError("W and A_hat are not mutual pseudo-inverses")
        if self.n_components > self.means.size:
            raise ValueError("more components than input channels")


def center(X):
    """Remove per-row means. Returns ``(centered, means)``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.size == 0:
        raise ValueError("cannot center an empty matrix")
    if X.shape[1] < 2:
        raise ValueError("need at least 2 samples to center")
    means = X.mean(axis=1)
    return X - means[:, None], means


def whiten(X, rank_tolerance: float = 1e-10):
    """Decorrelate centered rows to unit covariance.

    Eigendecomposes the channel covariance (ddof=1, matching ``np.cov``)
    and keeps eigenvalues above ``rank_tolerance`` times the largest, so
    numerically rank-deficient inputs lose the dead directions instead
    of amplifying noise.

    Returns
    -------
    (Z, whitener, eigenvalues)
        ``Z = whitener @ X`` has identity covariance on the retained
        dimensions; ``eigenvalues`` are the retained ones, descending.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if not np.any(X):
        raise ValueError("cannot whiten an all-zero matrix")
    n_samples = X.shape[1]
    cov = (X @ X.T) / (n_samples - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    keep = eigvals > rank_tolerance * eigvals[0]
    eigvals = eigvals[keep]
    eigvecs = eigvecs[:, keep]
    whitener = (eigvecs / np.sqrt(eigvals)).T
    return whitener @ X, whitener, eigvals


def _random_orthogonal(n: int, rng: np.random.Generator):
    """Haar-ish random orthogonal matrix: QR with sign-fixed diagonal."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.diag(r)
    return q * np.where(d == 0, 1.0, np.sign(d))


def _sym_decorrelate(W):
    """Closest orthogonal matrix in the (W W^T)^(-1/2) W sense."""
    s, u = np.linalg.eigh(W @ W.T)
    return (u / np.sqrt(s)) @ u.T @ W


def _check_whitened_input(Z):
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    if Z.shape[0] == 0 or Z.size == 0:
        raise ValueError("need at least one component")
    if not np.all(np.isfinite(Z)):
        raise ValueError("whitened data contains non-finite values")
    return Z


def fastica(Z, opts: IcaOptions | None = None):
    """Fixed-point FastICA rotation search with the log-cosh contrast.

    Deflation mode extracts one unit vector at a time, decorrelating
    against the vectors already found (Gram-Schmidt); parallel mode
    updates all vectors at once followed by symmetric decorrelation. A
    vector counts as converged when ``| |<w_new, w_old>| - 1 |`` falls
    below the tolerance.

    Returns
    -------
    (rotation, iterations_used, converged)
        ``iterations_used`` totals fixed-point updates across all
        components in deflation mode and counts sweeps in parallel mode;
        ``converged`` reports whether every vector met the tolerance
        within the iteration budget.
    """
    opts = opts or IcaOptions()
    Z = _check_whitened_input(Z)
    n, m = Z.shape
    max_iter = opts.resolved_max_iterations("fastica")
    rng = np.random.default_rng(opts.seed)
    W0 = _random_orthogonal(n, rng)

    if opts.mode == "parallel":
        W = W0
        iterations = 0
        converged = False
        for _ in range(max_iter):
            U = W @ Z
            G = np.tanh(U)
            g_prime_mean = 1.0 - np.mean(G * G, axis=1)
            W_new = _sym_decorrelate((G @ Z.T) / m - g_prime_mean[:, None] * W)
            iterations += 1
            drift = np.max(np.abs(np.abs(np.sum(W_new * W, axis=1)) - 1.0))
            W = W_new
            if drift < opts.tolerance:
                converged = True
                break
        return W, iterations, converged

    W = np.zeros((n, n))
    iterations = 0
    converged = True
    for c in range(n):
        w = W0[c] - W[:c].T @ (W[:c] @ W0[c])
        w /= np.linalg.norm(w)
        comp_converged = False
        for _ in range(max_iter):
            u = w @ Z
            g = np.tanh(u)
            w_new = (Z @ g) / m - (1.0 - np.mean(g * g)) * w
            w_new -= W[:c].T @ (W[:c] @ w_new)
            norm = np.linalg.norm(w_new)
            if norm == 0.0:
                break
            w_new /= norm
            iterations += 1
            done = abs(abs(w_new @ w) - 1.0) < opts.tolerance
            w = w_new
            if done:
                comp_converged = True
                break
        W[c] = w
        converged = converged and comp_converged
    return W, iterations, converged


def infomax(Z, opts: IcaOptions | None = None):
    """Natural-gradient Infomax rotation search, logistic nonlinearity.

    Each pass visits the samples in a fresh random order in mini-blocks
    of ``floor(sqrt(n_samples / 3))`` and applies the update
    ``W += lr * (block * I + y u^T) W`` with ``y = 1 - 2 sigmoid(u)``.
    Progress is tracked on the orthogonalized rotation, not the raw
    weights: the weight norm keeps creeping toward the nonlinearity's
    scale equilibrium long after the rotation (the quantity returned)
    has stopped moving, and counting that drift as progress would make
    the pass count balloon on noisy data. The learning rate is annealed
    whenever the angle between successive rotation changes exceeds the
    threshold; iteration stops when the rotation change norm drops below
    the tolerance or when the angle stays small for
    ``SMALL_ANGLE_PASSES`` consecutive passes. That plateau rule
    (standard in EEG toolboxes) catches the slow coherent drift that
    weakly determined, noise-heavy mixtures produce; without it the pass
    count would balloon at low SNR instead of staying flat.

    Raises
    ------
    ValueError
        If the weights diverge; retry with a smaller ``learning_rate``.
    """
    opts = opts or IcaOptions()
    Z = _check_whitened_input(Z)
    n, m = Z.shape
    max_passes = opts.resolved_max_iterations(INFOMAX)
    if max_passes < 1:
        raise ValueError("max_iterations must be at least 1")
    lrate = opts.resolved_learning_rate(n)
    rng = np.random.default_rng(opts.seed)
    W = _random_orthogonal(n, rng)
    block = max(1, int(math.floor(math.sqrt(m / 3.0))))
    eye = np.eye(n)

    # The annealing reference delta is refreshed only when an anneal fires
    # (classic runica behavior); once the rotation stops making consistent
    # progress the rate decays geometrically, which keeps the pass count
    # nearly independent of the data's noise level.
    rotation = _sym_decorrelate(W)
    ref_delta = None
    annealed = False
    small_angle_streak = 0
    converged = False
    passes = 0
    for _ in range(max_passes):
        perm = rng.permutation(m)
        for start in range(0, m, block):
            sel = perm[start:start + block]
            u = W @ Z[:, sel]
            y = 1.0 - 2.0 * expit(u)
            W = W + lrate * ((sel.size * eye + y @ u.T) @ W)
            if not np.all(np.isfinite(W)) or np.max(np.abs(W)) > MAX_WEIGHT:
                raise ValueError(
                    "infomax weights diverged; use a smaller learning_rate"
                )
        passes += 1
        new_rotation = _sym_decorrelate(W)
        delta = new_rotation - rotation
        rotation = new_rotation
        change = float(np.linalg.norm(delta))
        if change < opts.tolerance:
            converged = True
            break
        if ref_delta is None:
            ref_delta = delta
            continue
        denom = change * float(np.linalg.norm(ref_delta))
        if denom > 0:
            cos_angle = float(np.sum(delta * ref_delta)) / denom
            angle = math.degrees(math.acos(min(1.0, max(-1.0, cos_angle))))
            if angle > opts.anneal_threshold:
                lrate *= opts.anneal_factor
                ref_delta = delta
                annealed = True
                small_angle_streak = 0
            elif annealed:
                # only a drift that interrupts an ongoing anneal cascade is
                # a plateau; steady small angles before any anneal are just
                # honest early progress
                small_angle_streak += 1
                if small_angle_streak >= SMALL_ANGLE_PASSES:
                    converged = True
                    break
    return rotation, passes, converged


def _normalize_algorithm(algorithm: str, opts: IcaOptions) -> str:
    if algorithm == "fastica":
        return FASTICA_PARALLEL if opts.mode == "parallel" else FASTICA_DEFLATION
    if algorithm in ALGORITHMS:
        return algorithm
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def fit(rec: Recording, algorithm: str = FASTICA_DEFLATION,
        opts: IcaOptions | None = None, rank_tolerance: float = 1e-10) -> IcaModel:
    """Estimate an unmixing model from a recording's measurement channels.

    EOG and reference channels never enter the decomposition. The sign
    of each component is fixed so that its largest-magnitude sample is
    positive, which makes repeated fits comparable.
    """
    opts = opts or IcaOptions()
    algorithm = _normalize_algorithm(algorithm, opts)
    meas = rec.measurement_indices
    if len(meas) < 2:
        raise ValueError(
            f"need at least 2 measurement channels, got {len(meas)}"
        )
    X = rec.data[meas]
    if X.shape[1] < X.shape[0]:
        raise ValueError(
            f"need at least as many samples ({X.shape[1]}) as channels ({X.shape[0]})"
        )
    Xc, means = center(X)
    Z, whitener, _ = whiten(Xc, rank_tolerance=rank_tolerance)

    if algorithm == INFOMAX:
        rotation, iterations, converged = infomax(Z, opts)
    else:
        mode = "parallel" if algorithm == FASTICA_PARALLEL else "deflation"
        rotation, iterations, converged = fastica(Z, replace(opts, mode=mode))

    W = rotation @ whitener
    sources_raw = W @ Xc
    peak = np.take_along_axis(
        sources_raw, np.argmax(np.abs(sources_raw), axis=1)[:, None], axis=1
    ).ravel()
    flip = np.where(peak < 0, -1.0, 1.0)
    rotation = rotation * flip[:, None]
    W = W * flip[:, None]

    return IcaModel(
        means=means,
        whitener=whitener,
        rotation=rotation,
        W=W,
        A_hat=np.linalg.pinv(W),
        n_components=W.shape[0],
        algorithm=algorithm,
        iterations_used=iterations,
        converged=converged,
        channel_labels=[rec.labels[i] for i in meas],
    )


def _measurement_block(model: IcaModel, rec: Recording):
    meas = rec.measurement_indices
    labels = [rec.labels[i] for i in meas]
    if labels != list(model.channel_labels):
        raise ValueError(
            f"recording measurement channels {labels} do not match "
            f"the fitted model's {list(model.channel_labels)}"
        )
    return meas, rec.data[meas]


def sources(model: IcaModel, rec: Recording):
    """Component time courses ``W (x - means)``, one row per component."""
    _, X = _measurement_block(model, rec)
    return model.W @ (X - model.means[:, None])


def nullify_and_reconstruct(model: IcaModel, rec: Recording, drop) -> Recording:
    """Zero the given components and re-mix back to channel space.

    Channels that did not enter the fit pass through untouched.
    """
    drop = sorted(set(int(i) for i in drop))
    for i in drop:
        if not 0 <= i < model.n_components:
            raise IndexError(
                f"component index {i} out of range [0, {model.n_components})"
            )
    meas, X = _measurement_block(model, rec)
    S = model.W @ (X - model.means[:, None])
    if drop:
        S[drop, :] = 0.0
    rebuilt = model.A_hat @ S + model.means[:, None]
    data = rec.data.copy()
    data[meas] = rebuilt
    return rec.with_data(data)


def permutation_scaling_distance(W, A) -> float:
    """Amari-style distance of ``P = W A`` from a scaled permutation.

    Averages the row-wise and column-wise ``sum|p| / max|p| - 1`` terms
    and rescales by the size so the score is 0 exactly for a scaled
    permutation and 1 for a constant matrix.
    """
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if W.shape[1] != A.shape[0]:
        raise ValueError(f"cannot multiply {W.shape} by {A.shape}")
    P = np.abs(W @ A)
    if P.shape[0] != P.shape[1]:
        raise ValueError(f"W A must be square, got {P.shape}")
    n = P.shape[0]
    if n == 1:
        return 0.0
    row_terms = P.sum(axis=1) / P.max(axis=1) - 1.0
    col_terms = P.sum(axis=0) / P.max(axis=0) - 1.0
    return float((row_terms.sum() + col_terms.sum()) / (2.0 * n * (n - 1)))
