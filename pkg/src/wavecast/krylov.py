"""Short-recurrence field evaluation for the stretched wave operator.

The operator A is complex symmetric under the weight M (see operator
module), which admits a two-sided Lanczos process whose left vectors
are the M-images of the right ones.  Running the recursion with
unit-Euclidean-norm vectors keeps it stable even though the bilinear
form w^T M w is indefinite:

    zeta_{i+1} w_{i+1} = A w_i - alpha_i w_i - (delta_i/delta_{i-1})
                                               zeta_i w_{i-1}

with delta_i = w_i^T M w_i, alpha_i = w_i^T M A w_i / delta_i and
zeta_{i+1} = ||r|| > 0 real.  The projected matrix is the complex
tridiagonal T_m with diagonal alpha, subdiagonal zeta_{i+1} and
superdiagonal (delta_{i+1}/delta_i) zeta_{i+1}.

Field values at probe nodes follow from the spectral decomposition of
the symmetrized T_m and the stability-corrected exponent kernel

    f(t, a) = exp(-sqrt(a) t) / sqrt(a)

with the principal square root (branch approached from above on the
negative real axis): u(t) = zeta_1 * Re[W f(t, T_m) e_1] stays bounded
for spectra anywhere off the branch cut, unlike the naive
sin(sqrt(-a) t)/sqrt(-a) kernel, which diverges off the real axis.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.signal

from .errors import (
    BranchCutError,
    BreakdownError,
    InvalidParameterError,
    NearDefectiveError,
    PrecisionError,
    SamplingError,
)


def sctde_scalar(t, a):
    """Stability-corrected exponent kernel exp(-sqrt(a) t)/sqrt(a).

    Principal square root; a on the closed negative real axis sits on
    the branch cut and is rejected (matrix routines use the limit from
    above instead, taking real parts afterwards).
    """
    a = complex(a)
    if a.imag == 0.0 and a.real <= 0.0:
        raise BranchCutError(
            f"argument {a} lies on the branch cut (-inf, 0]"
        )
    sq = np.sqrt(a)
    return np.exp(-sq * np.asarray(t)) / sq


def _sqrt_from_above(z):
    """Principal sqrt with the negative real axis approached from above."""
    z = np.asarray(z, dtype=complex)
    out = np.sqrt(z)
    flip = (z.imag == 0.0) & (z.real < 0.0) & (out.imag < 0.0)
    return np.where(flip, -out, out)


def sc_resolvent_dense(lam, a_dense):
    """Stability-corrected resolvent of a dense matrix.

    f(lam, A) = 1/2 A^{-1/2} (sqrt(lam) I + sqrt(A))^{-1}
              + 1/2 conj(A^{-1/2}) (sqrt(lam) I + conj(sqrt(A)))^{-1}

    with sqrt(lam) = i sqrt(|lam|) for lam < 0 (limit from above).  Its
    real part equals Re (A - lam I)^{-1} for lam on the negative axis.
    Dense reference implementation for small systems.
    """
    a_dense = np.asarray(a_dense, dtype=complex)
    n = a_dense.shape[0]
    sqlam = complex(_sqrt_from_above(complex(lam)))
    sqa = scipy.linalg.sqrtm(a_dense).astype(complex)
    inv_sqa = np.linalg.inv(sqa)
    eye = np.eye(n)
    term1 = inv_sqa @ np.linalg.inv(sqlam * eye + sqa)
    term2 = np.conj(inv_sqa) @ np.linalg.inv(sqlam * eye + np.conj(sqa))
    return 0.5 * (term1 + term2)


@dataclass
class LanczosDecomposition:
    """State of a (possibly truncated) recursion run.

    Arrays are sized by the completed iteration count m; w_probe holds
    the probe rows of every basis vector, and the two trailing basis
    vectors allow the recursion to be extended later.
    """

    n: int
    m: int
    alpha: np.ndarray
    zeta: np.ndarray          # zeta_1 .. zeta_m (zeta_1 = ||b||)
    delta: np.ndarray
    zeta_next: float
    probe_indices: np.ndarray
    w_probe: np.ndarray       # (n_probes, m)
    w_last: np.ndarray        # w_m
    w_next: np.ndarray        # w_{m+1} (unit norm), meaningless if happy
    happy: bool               # recursion closed an invariant subspace
    drift: float              # max |w_j^T M w_1| observed at checks
    basis: np.ndarray | None = None

    def truncate(self, m_new):
        """Decomposition of the leading m_new iterations (no restart
        capability: trailing vectors are not retained)."""
        if not 1 <= m_new <= self.m:
            raise InvalidParameterError(
                f"cannot truncate length-{self.m} run to {m_new}"
            )
        if m_new == self.m:
            return self
        return dataclasses.replace(
            self,
            m=m_new,
            alpha=self.alpha[:m_new],
            zeta=self.zeta[:m_new],
            delta=self.delta[:m_new],
            zeta_next=float(abs(self.zeta[m_new])) if m_new < self.m else self.zeta_next,
            w_probe=self.w_probe[:, :m_new],
            w_last=np.empty(0, dtype=complex),
            w_next=np.empty(0, dtype=complex),
            happy=False,
            basis=None if self.basis is None else self.basis[:, :m_new],
        )

    @property
    def can_extend(self):
        return self.w_last.size == self.n and not self.happy

    def save(self, path):
        np.savez(
            path,
            n=self.n,
            m=self.m,
            alpha=self.alpha,
            zeta=self.zeta,
            delta=self.delta,
            zeta_next=self.zeta_next,
            probe_indices=self.probe_indices,
            w_probe=self.w_probe,
            w_last=self.w_last,
            w_next=self.w_next,
            happy=self.happy,
            drift=self.drift,
        )

    @staticmethod
    def load(path):
        d = np.load(path)
        return LanczosDecomposition(
            n=int(d["n"]),
            m=int(d["m"]),
            alpha=d["alpha"],
            zeta=d["zeta"],
            delta=d["delta"],
            zeta_next=float(d["zeta_next"]),
            probe_indices=d["probe_indices"],
            w_probe=d["w_probe"],
            w_last=d["w_last"],
            w_next=d["w_next"],
            happy=bool(d["happy"]),
            drift=float(d["drift"]),
        )


def _run_recursion(op, state, m_target, breakdown_tol, check_every,
                   store_basis):
    """Advance the recursion in `state` up to m_target iterations."""
    a_mat = op.a_mat
    m_diag = op.m_diag
    m_scale = float(np.abs(m_diag).max())
    probes = state.probe_indices

    alpha = list(state.alpha)
    zeta = list(state.zeta)
    delta = list(state.delta)
    wp_cols = [state.w_probe[:, j] for j in range(state.m)]
    basis_cols = None
    if store_basis:
        basis_cols = [state.basis[:, j] for j in range(state.m)] \
            if state.basis is not None else []

    if state.m == 0:
        w_prev = np.zeros(state.n, dtype=complex)
        w_cur = state.w_next  # holds b/||b|| at start
        zeta_cur = state.zeta_next  # ||b||
        delta_prev = 1.0
    else:
        w_prev = state.w_last
        w_cur = state.w_next
        zeta_cur = state.zeta_next
        delta_prev = delta[-1]

    drift = state.drift
    happy = False
    i = state.m
    w_first = None
    while i < m_target:
        i += 1
        d_i = w_cur @ (m_diag * w_cur)
        if abs(d_i) < breakdown_tol * m_scale:
            raise BreakdownError(
                f"bilinear form collapsed at iteration {i}: "
                f"|delta| = {abs(d_i):.3e}",
                index=i,
            )
        aw = a_mat @ w_cur
        a_i = (w_cur @ (m_diag * aw)) / d_i
        r = aw - a_i * w_cur
        if i > 1:
            # zeta_cur is zeta_i, the norm that produced w_i
            r = r - (d_i / delta_prev) * zeta_cur * w_prev
        alpha.append(a_i)
        zeta.append(zeta_cur)
        delta.append(d_i)
        wp_cols.append(w_cur[probes].copy())
        if store_basis:
            basis_cols.append(w_cur.copy())
        if w_first is None:
            w_first = w_cur
        z_next = float(np.linalg.norm(r))
        if z_next < 1e-14 * float(np.abs(aw).max() + abs(a_i)):
            happy = True
            w_prev, w_cur = w_cur, np.zeros(state.n, dtype=complex)
            zeta_cur = 0.0
            delta_prev = d_i
            break
        w_prev, w_cur = w_cur, r / z_next
        zeta_cur = z_next
        delta_prev = d_i
        if check_every and i % check_every == 0:
            # global two-sided orthogonality drift against the first
            # vector; purely diagnostic
            drift = max(drift, float(abs(w_cur @ (m_diag * w_first))
                                     / m_scale))

    return LanczosDecomposition(
        n=state.n,
        m=i,
        alpha=np.array(alpha, dtype=complex),
        zeta=np.array(zeta, dtype=float),
        delta=np.array(delta, dtype=complex),
        zeta_next=float(zeta_cur),
        probe_indices=probes,
        w_probe=np.array(wp_cols, dtype=complex).T
        if wp_cols else np.zeros((len(probes), 0), dtype=complex),
        w_last=w_prev,
        w_next=w_cur,
        happy=happy,
        drift=drift,
        basis=np.array(basis_cols, dtype=complex).T if store_basis else None,
    )


def bilanczos(op, b, m, probe_indices, breakdown_tol=1e-14,
              check_every=500, store_basis=False):
    """Run m iterations of the renormalized two-sided recursion.

    b is the start vector (the sampled source); probe_indices are the
    unknown indices whose basis components are retained for field
    evaluation.  Raises BreakdownError if the bilinear form collapses;
    stops early (happy = True) if an invariant subspace closes.
    """
    if m < 1:
        raise InvalidParameterError(f"need m >= 1, got {m}")
    b = np.asarray(b, dtype=complex)
    if b.shape != (op.n,):
        raise InvalidParameterError("start vector length mismatch")
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        raise InvalidParameterError("start vector is zero")
    probes = np.asarray(probe_indices, dtype=int)
    if probes.size == 0:
        raise InvalidParameterError("need at least one probe index")
    if probes.min() < 0 or probes.max() >= op.n:
        raise InvalidParameterError("probe index out of range")
    state = LanczosDecomposition(
        n=op.n,
        m=0,
        alpha=np.empty(0, dtype=complex),
        zeta=np.empty(0, dtype=float),
        delta=np.empty(0, dtype=complex),
        zeta_next=norm_b,
        probe_indices=probes,
        w_probe=np.zeros((probes.size, 0), dtype=complex),
        w_last=np.empty(0, dtype=complex),
        w_next=b / norm_b,
        happy=False,
        drift=0.0,
        basis=np.zeros((op.n, 0), dtype=complex) if store_basis else None,
    )
    return _run_recursion(op, state, m, breakdown_tol, check_every,
                          store_basis)


def extend_bilanczos(op, decomp, m_target, breakdown_tol=1e-14,
                     check_every=500):
    """Continue a saved recursion to m_target iterations."""
    if not decomp.can_extend:
        raise InvalidParameterError(
            "decomposition does not carry the trailing vectors needed "
            "to extend (it was truncated or closed an invariant "
            "subspace)"
        )
    if decomp.n != op.n:
        raise InvalidParameterError("operator size mismatch")
    if m_target <= decomp.m:
        raise InvalidParameterError(
            f"target m {m_target} does not exceed current {decomp.m}"
        )
    return _run_recursion(op, decomp, m_target, breakdown_tol,
                          check_every, store_basis=False)


@dataclass(frozen=True)
class ModeSet:
    """Spectral form of a projected run: field at probe p is

        u_p(t) = zeta_1 * Re sum_i probe_modes[p, i] * weights[i]
                                  * f(t, theta[i]).
    """

    theta: np.ndarray
    probe_modes: np.ndarray
    weights: np.ndarray
    zeta1: float
    recon_error: float


def eigen_tridiag(decomp, recon_tol=1e-8, defect_tol=1e-12):
    """Diagonalize the projected tridiagonal for field evaluation.

    Works on the symmetrized H = D^{1/2} T D^{-1/2} (complex symmetric;
    the branch choices in D^{1/2} cancel).  Mode weights come from
    solving S x = e_1 rather than trusting S^T ~= S^{-1}: ghost modes
    from orthogonality loss at large m leave the solve-based weights
    accurate when the transpose shortcut fails badly.
    """
    m = decomp.m
    alpha, zeta, delta = decomp.alpha, decomp.zeta, decomp.delta
    sqd = np.sqrt(delta)
    h = np.zeros((m, m), dtype=complex)
    h[np.arange(m), np.arange(m)] = alpha
    if m > 1:
        off = zeta[1:] * sqd[1:] / sqd[:-1]
        h[np.arange(m - 1), np.arange(1, m)] = off
        h[np.arange(1, m), np.arange(m - 1)] = off
    theta, s = np.linalg.eig(h)
    quasi = np.sum(s * s, axis=0)
    if np.min(np.abs(quasi)) < defect_tol:
        raise NearDefectiveError(
            "projected matrix is numerically defective: an eigenvector "
            f"is quasi-isotropic (|s^T s| = {np.min(np.abs(quasi)):.2e})"
        )
    s = s / np.sqrt(quasi)[None, :]
    e1 = np.zeros(m, dtype=complex)
    e1[0] = 1.0
    coeff = np.linalg.solve(s, e1)
    h_scale = float(np.abs(h).max())
    recon = float(np.linalg.norm(s @ (theta * coeff) - h[:, 0]))
    if recon > recon_tol * h_scale:
        raise PrecisionError(
            f"eigendecomposition failed reconstruction: residual {recon:.2e}"
            f" exceeds {recon_tol:.0e} * {h_scale:.2e}"
        )
    probe_modes = (decomp.w_probe / sqd[None, :]) @ s
    weights = coeff * sqd[0]
    return ModeSet(
        theta=theta,
        probe_modes=probe_modes,
        weights=weights,
        zeta1=float(decomp.zeta[0]),
        recon_error=recon / h_scale,
    )


def evaluate_impulse(modes, times, kernel="stable"):
    """Impulse response at the probes for t >= 0.

    kernel "stable" uses exp(-sqrt(a) t)/sqrt(a); kernel "uncorrected"
    uses -sin(sqrt(-a) t)/sqrt(-a), which is exact on the real negative
    spectrum but blows up off it (kept as a negative control).
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidParameterError("times must be a nonempty 1D array")
    if np.any(times < 0.0):
        raise InvalidParameterError("impulse response is causal: t >= 0")
    if kernel == "stable":
        sq = _sqrt_from_above(modes.theta)
        fvals = np.exp(-sq[:, None] * times[None, :]) / sq[:, None]
    elif kernel == "uncorrected":
        sq = _sqrt_from_above(-modes.theta)
        fvals = -np.sin(sq[:, None] * times[None, :]) / sq[:, None]
    else:
        raise InvalidParameterError(f"unknown kernel {kernel!r}")
    u = (modes.probe_modes * modes.weights[None, :]) @ fvals
    return modes.zeta1 * u.real


def convolve_source(impulse, q_samples, dt, omega_max=None):
    """Convolve probe impulse responses with a source history.

    u(t_j) = integral_0^{t_j} q(tau) K(t_j - tau) dtau by trapezoid on
    the shared uniform step dt (FFT convolution plus endpoint
    correction).  If omega_max is given, dt must resolve the band:
    dt <= pi / (4 omega_max), i.e. at least 8 samples per shortest
    period.
    """
    impulse = np.atleast_2d(np.asarray(impulse, dtype=float))
    q = np.asarray(q_samples, dtype=float)
    if q.ndim != 1 or q.size != impulse.shape[1]:
        raise InvalidParameterError(
            "source history must match the impulse sample count"
        )
    if dt <= 0.0:
        raise InvalidParameterError("dt must be positive")
    if omega_max is not None and dt > np.pi / (4.0 * omega_max):
        raise SamplingError(
            f"dt = {dt:.3e} undersamples the band: need dt <= "
            f"{np.pi / (4.0 * omega_max):.3e} (8 points per shortest period)"
        )
    nt = q.size
    full = scipy.signal.fftconvolve(impulse, q[None, :], mode="full")
    u = full[:, :nt] * dt
    # trapezoid endpoint weights (1/2 at tau = 0 and tau = t)
    u = u - 0.5 * dt * (q[0] * impulse + impulse[:, :1] * q[None, :])
    return u
