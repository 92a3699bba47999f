"""Similarity constants as condition-number-minimal Hermitian weights.

An invertible ``R`` with ``norm(R T R^{-1}) <= 1`` exists exactly when
some Hermitian positive definite ``P = R* R`` satisfies the Stein
inequality ``T* P T <= P``; the best achievable ``cond(R) = sqrt(cond(P))``
is the similarity constant of ``T``.  For a semigroup ``exp(tA)`` the
role of the Stein inequality is played by the Lyapunov inequality
``A* P + P A <= 2 shift P``, which certifies ``norm(exp(tA))_P <=
exp(shift * t)`` for all ``t >= 0`` at once.

Feasibility at a fixed condition budget ``kappa`` is solved by
minimizing the convex spectral penalty

    f(P) = max(eig_max(constraint defect))     over   I <= P <= kappa^2 I

with a projected subgradient method using Polyak steps; the box is
enforced exactly by eigenvalue clipping each iteration.  Stable targets
are seeded with solutions of the corresponding Stein/Lyapunov *equation*
(a feasible interior point), and bisection over ``kappa`` reuses the
previous certificate as a warm start.  Certificates are always
re-checked independently of the solver (:func:`certificate_check`);
infeasibility of a probe never masquerades as a theorem: the verdict
``unbounded`` is only ever backed by spectral or norm-growth evidence.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .exceptions import DimensionError
from .opcore import (
    as_matrix,
    growth_bound,
    matrix_to_json,
    numerical_abscissa,
    operator_norm,
    semigroup_from_generator,
    spectral_radius,
)

__all__ = [
    "SteinTarget",
    "LyapunovTarget",
    "WeightCertificate",
    "FeasibilityResult",
    "SimilarityVerdict",
    "stein_feasible",
    "lyapunov_feasible",
    "discrete_similarity_constant",
    "joint_similarity_constant",
    "quasi_similarity_constant",
    "min_quasi_shift",
    "certificate_check",
    "KAPPA_MAX_DEFAULT",
]

KAPPA_MAX_DEFAULT = 1e6
MAXITER_DEFAULT = 5000
_STALL_WINDOW = 300
_MIN_ITER_BEFORE_STALL = 600
_STALL_IMPROVEMENT = 1e-3


# ---------------------------------------------------------------------------
# targets and result records


@dataclass(frozen=True)
class SteinTarget:
    """Joint contractivity constraints ``Ti* P Ti <= P``."""

    operators: tuple

    @property
    def dim(self):
        return self.operators[0].shape[0]

    def scale(self):
        return max(1.0, max(operator_norm(T) ** 2 for T in self.operators))


@dataclass(frozen=True)
class LyapunovTarget:
    """Quasi-dissipativity constraint ``A* P + P A <= 2 shift P``."""

    generator: np.ndarray
    shift: float = 0.0

    @property
    def dim(self):
        return self.generator.shape[0]

    def scale(self):
        return max(1.0, 2.0 * operator_norm(self.generator) + 2.0 * abs(self.shift))


@dataclass(frozen=True)
class WeightCertificate:
    """Hermitian PD weight with its condition contribution and residual.

    ``kappa = sqrt(eig_max(P) / eig_min(P))`` is the condition number of
    the induced similarity ``R = P^{1/2}``; ``residual`` is the worst
    constraint violation in operator-norm units (clipped at zero).
    """

    weight: np.ndarray
    kappa: float
    residual: float

    def to_json(self):
        return {
            "kappa": self.kappa,
            "residual": self.residual,
            "P": matrix_to_json(self.weight),
        }


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of one fixed-``kappa`` feasibility solve.

    ``nearest`` is a valid certificate at its own (possibly larger than
    budget) kappa, produced as a by-product when the search lands on the
    constraint cone just outside the box; bisection callers use it to
    tighten their upper bracket.
    """

    certificate: Optional[WeightCertificate]
    best_residual: float
    iterations: int
    nearest: Optional[WeightCertificate] = None

    def __bool__(self):
        return self.certificate is not None


@dataclass(frozen=True)
class SimilarityVerdict:
    """Similarity constant with certificate, or the reason there is none.

    ``status`` is ``finite`` (certificate present, ``constant ==
    certificate.kappa``), ``unbounded`` (spectral or norm-growth
    obstruction, ``constant == inf``) or ``infeasible`` (no certificate
    found up to ``searched_kappa_max``; nothing is claimed beyond that).
    """

    status: str
    constant: float
    certificate: Optional[WeightCertificate]
    searched_kappa_max: float
    evidence: str = ""

    @property
    def finite(self):
        return self.status == "finite"

    def to_json(self):
        out = {
            "status": self.status,
            "constant": self.constant if math.isfinite(self.constant) else "inf",
            "kappa_max_searched": self.searched_kappa_max,
            "residual": self.certificate.residual if self.certificate else None,
            "P": matrix_to_json(self.certificate.weight) if self.certificate else None,
        }
        if self.evidence:
            out["evidence"] = self.evidence
        return out


# ---------------------------------------------------------------------------
# penalty machinery


def _defects(target, P):
    if isinstance(target, SteinTarget):
        return [T.conj().T @ P @ T - P for T in target.operators]
    A = target.generator
    lam = target.shift
    return [A.conj().T @ P + P @ A - 2.0 * lam * P]


def _penalty_and_subgradient(target, P):
    """Worst defect eigenvalue and a subgradient of it w.r.t. Hermitian P."""
    best_val = -np.inf
    best_vec = None
    best_idx = 0
    for i, D in enumerate(_defects(target, P)):
        w, U = np.linalg.eigh(0.5 * (D + D.conj().T))
        if w[-1] > best_val:
            best_val = float(w[-1])
            best_vec = U[:, -1]
            best_idx = i
    u = best_vec
    if isinstance(target, SteinTarget):
        x = target.operators[best_idx] @ u
        G = np.outer(x, x.conj()) - np.outer(u, u.conj())
    else:
        x = target.generator @ u
        G = (
            np.outer(u, x.conj())
            + np.outer(x, u.conj())
            - 2.0 * target.shift * np.outer(u, u.conj())
        )
    return best_val, G


def _penalty(target, P):
    return max(
        float(np.linalg.eigvalsh(0.5 * (D + D.conj().T))[-1]) for D in _defects(target, P)
    )


def _project_box(P, kappa2):
    P = 0.5 * (P + P.conj().T)
    w, U = np.linalg.eigh(P)
    w = np.clip(w, 1.0, kappa2)
    return (U * w) @ U.conj().T


def _kappa_of(P):
    w = np.linalg.eigvalsh(0.5 * (P + P.conj().T))
    return float(math.sqrt(max(w[-1], 0.0) / max(w[0], np.finfo(float).tiny)))


def _equation_seed(target, ctx=None):
    """Interior feasible point from the Stein/Lyapunov *equation*, if stable.

    Solving ``T* X T - X = -I`` (resp. ``Abar* X + X Abar = -I``) yields a
    strictly feasible Hermitian PD weight whenever the target is strictly
    stable; normalized to eig_min = 1 it doubles as an upper bracket for
    the similarity constant.
    """
    if not _is_strictly_stable(target):
        return None
    X = _equation_solve(target, np.eye(target.dim, dtype=_native_dtype(target)), ctx)
    if X is None:
        return None
    w = np.linalg.eigvalsh(X)
    if w[0] <= 0 or not np.all(np.isfinite(w)):
        return None
    return X / w[0]


def _split_seed(target):
    """Certificate from splitting critical and strictly stable spectrum.

    Power boundedness at finite dimension is exactly "critical
    eigenvalues semisimple"; an ordered Schur form isolates the critical
    block, a Sylvester solve decouples it from the strict part, and each
    part carries a closed-form weight (diagonalizer and equation
    solution).  This covers marginal targets such as a unitary block
    coupled to a nilpotent one, where neither the equation nor the plain
    eigen seed exists.
    """
    if isinstance(target, SteinTarget):
        if len(target.operators) != 1:
            return None
        M = target.operators[0]

        def critical(lam):
            return abs(lam) >= 1.0 - 1e-9

        def admissible(lam):
            return abs(lam) <= 1.0 + 1e-12
    else:
        M = target.generator - target.shift * np.eye(target.dim)

        def critical(lam):
            return lam.real >= -1e-9

        def admissible(lam):
            return lam.real <= 1e-12

    try:
        if not all(admissible(lam) for lam in np.linalg.eigvals(M)):
            return None
        theta, Z, sdim = scipy.linalg.schur(
            M.astype(complex), output="complex", sort=critical
        )
        n = M.shape[0]
        if sdim == 0 or sdim == n:
            return None  # plain equation or eigen seed territory
        th1 = theta[:sdim, :sdim]
        th12 = theta[:sdim, sdim:]
        th2 = theta[sdim:, sdim:]
        # decouple: [[I, Y],[0, I]] conjugation kills the coupling when
        # th1 Y - Y th2 = -th12
        Y = scipy.linalg.solve_sylvester(th1, -th2, -th12)
        w1, V1 = np.linalg.eig(th1)
        if not np.isfinite(np.linalg.cond(V1)) or np.linalg.cond(V1) > 1e8:
            return None
        P1 = np.linalg.inv(V1 @ V1.conj().T)
        if isinstance(target, SteinTarget):
            P2 = scipy.linalg.solve_discrete_lyapunov(
                th2.conj().T, np.eye(n - sdim), method="bilinear"
            )
        else:
            P2 = scipy.linalg.solve_continuous_lyapunov(th2.conj().T, -np.eye(n - sdim))
        S = np.eye(n, dtype=complex)
        S[:sdim, sdim:] = -Y
        Pb = np.zeros((n, n), dtype=complex)
        Pb[:sdim, :sdim] = P1
        Pb[sdim:, sdim:] = P2
        P = Z @ (S.conj().T @ Pb @ S) @ Z.conj().T
        P = 0.5 * (P + P.conj().T)
        pw = np.linalg.eigvalsh(P)
        if pw[0] <= 0 or not np.all(np.isfinite(pw)):
            return None
        P = P / pw[0]
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError, ValueError):
        return None
    if _native_dtype(target).kind != "c" and np.max(np.abs(P.imag)) < 1e-13:
        P = np.ascontiguousarray(P.real)
    return P


def _eigen_seed(target):
    """Diagonalizing weight for marginal targets with semisimple spectrum.

    If the single constraint matrix diagonalizes as ``V L V^{-1}`` with
    admissible eigenvalues, the weight ``(V V*)^{-1}`` renorms it to the
    diagonal part, which satisfies the constraint with equality; this is
    the only closed-form seed available when the target is not strictly
    stable (unitary-like operators, skew generators under zero shift).
    """
    if isinstance(target, SteinTarget):
        if len(target.operators) != 1:
            return None
        M = target.operators[0]
    else:
        M = target.generator
    try:
        w, V = np.linalg.eig(M)
        if isinstance(target, SteinTarget):
            if np.max(np.abs(w)) > 1.0 + 1e-12:
                return None
        elif np.max(w.real) > target.shift + 1e-12:
            return None
        if not np.isfinite(np.linalg.cond(V)) or np.linalg.cond(V) > 1e8:
            return None
        P = np.linalg.inv(V @ V.conj().T)
    except np.linalg.LinAlgError:
        return None
    P = 0.5 * (P + P.conj().T)
    pw = np.linalg.eigvalsh(P)
    if pw[0] <= 0 or not np.all(np.isfinite(pw)):
        return None
    P = P / pw[0]
    if _native_dtype(target).kind != "c" and np.max(np.abs(P.imag)) < 1e-13:
        P = np.ascontiguousarray(P.real)
    return P


class _EquationContext:
    """Cached Schur factorization for one target's defect-equation solves.

    The defect map ``L`` of a strictly stable single-constraint target is
    a linear bijection; this context solves ``L(X) = -Q`` and the adjoint
    ``L*(Z) = M`` with one LAPACK ``trsyl`` call each, reusing a single
    Schur decomposition.  The Stein case is reduced to the continuous one
    through the Cayley transform ``S = (T - I)(T + I)^{-1}``, using

        T*XT - X = (1/2) (T+I)* (S*X + X S) (T+I).
    """

    def __init__(self, theta, U, trsyl):
        self._theta = theta
        self._U = U
        self._trsyl = trsyl
        self._lu = None  # Stein only: LU of (T + I)

    @classmethod
    def for_target(cls, target):
        try:
            if isinstance(target, SteinTarget):
                if len(target.operators) != 1:
                    return None
                T = target.operators[0]
                n = T.shape[0]
                F = T + np.eye(n)
                lu = scipy.linalg.lu_factor(F)
                S = scipy.linalg.lu_solve(lu, (T - np.eye(n)).conj().T, trans=2).conj().T
                theta, U = scipy.linalg.schur(S)
                if np.iscomplexobj(S):
                    theta, U = scipy.linalg.schur(S, output="complex")
                ctx = cls(theta, U, scipy.linalg.get_lapack_funcs(("trsyl",), (theta,)))
                ctx._lu = lu
                return ctx
            Abar = target.generator - target.shift * np.eye(target.dim)
            if np.iscomplexobj(Abar):
                theta, U = scipy.linalg.schur(Abar, output="complex")
            else:
                theta, U = scipy.linalg.schur(Abar)
            return cls(theta, U, scipy.linalg.get_lapack_funcs(("trsyl",), (theta,)))
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError, ValueError):
            return None

    def _sylvester(self, rhs, trana, tranb):
        trsyl = self._trsyl[0]
        U = self._U
        C = U.conj().T @ rhs @ U
        y, scale, info = trsyl(self._theta, self._theta, C, trana=trana, tranb=tranb, isgn=1)
        if info != 0 or scale == 0.0:
            return None
        X = U @ (y / scale) @ U.conj().T
        X = 0.5 * (X + X.conj().T)
        if not np.all(np.isfinite(X)):
            return None
        return X

    def _stein_rhs(self, Q, adjoint):
        # primal: 2 F^{-*} Q F^{-1};  adjoint: 2 F^{-1} M F^{-*}
        lu = self._lu
        if adjoint:
            Y = scipy.linalg.lu_solve(lu, Q)
            return 2.0 * scipy.linalg.lu_solve(lu, Y.conj().T).conj().T
        Y = scipy.linalg.lu_solve(lu, Q, trans=2)
        return 2.0 * scipy.linalg.lu_solve(lu, Y.conj().T, trans=2).conj().T

    def solve(self, Q):
        """Hermitian ``X`` with ``defect(X) = -Q``."""
        rhs = -Q if self._lu is None else -self._stein_rhs(Q, adjoint=False)
        return self._sylvester(rhs, trana="C", tranb="N")

    def solve_adjoint(self, M):
        """Hermitian ``Z`` with ``L*(Z) = M``."""
        rhs = M if self._lu is None else self._stein_rhs(M, adjoint=True)
        return self._sylvester(rhs, trana="N", tranb="C")


def _equation_solve(target, Q, ctx=None):
    """Solve the Stein/Lyapunov equation with right-hand side ``-Q``.

    Returns Hermitian ``X`` with ``defect(X) = -Q`` for the strictly
    stable single-constraint targets, else None.
    """
    if ctx is not None:
        return ctx.solve(Q)
    try:
        if isinstance(target, SteinTarget):
            if len(target.operators) != 1:
                return None
            T = target.operators[0]
            X = scipy.linalg.solve_discrete_lyapunov(T.conj().T, Q, method="bilinear")
        else:
            Abar = target.generator - target.shift * np.eye(target.dim)
            X = scipy.linalg.solve_continuous_lyapunov(Abar.conj().T, -Q)
        X = 0.5 * (X + X.conj().T)
        if not np.all(np.isfinite(X)):
            return None
        return X
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError, ValueError):
        return None


def _equation_solve_adjoint(target, M, ctx=None):
    """Solve the adjoint constraint equation ``L*(Z) = M``."""
    if ctx is not None:
        return ctx.solve_adjoint(M)
    try:
        if isinstance(target, SteinTarget):
            T = target.operators[0]
            Z = scipy.linalg.solve_discrete_lyapunov(T, -M, method="bilinear")
        else:
            Abar = target.generator - target.shift * np.eye(target.dim)
            Z = scipy.linalg.solve_continuous_lyapunov(Abar, M)
        Z = 0.5 * (Z + Z.conj().T)
        if not np.all(np.isfinite(Z)):
            return None
        return Z
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError, ValueError):
        return None


def _is_strictly_stable(target):
    if isinstance(target, SteinTarget):
        return len(target.operators) == 1 and spectral_radius(target.operators[0]) < 1.0 - 1e-9
    return growth_bound(target.generator) < target.shift - 1e-9


def _cone_certificate(target, P, tol, ctx=None):
    """Restore ``P`` exactly onto the constraint cone and certify it there.

    One equation solve repairs the positive defect part; the result is a
    valid certificate at its own kappa regardless of any box budget.
    """
    D = _defects(target, P)[0]
    w, U = np.linalg.eigh(0.5 * (D + D.conj().T))
    if w[-1] > 0.0:
        X = _equation_solve(target, (U * np.maximum(w, 0.0)) @ U.conj().T, ctx)
        if X is None:
            return None
        P = 0.5 * (P + X + (P + X).conj().T)
    pw = np.linalg.eigvalsh(P)
    if pw[0] <= 0 or not np.all(np.isfinite(pw)):
        return None
    P = P / pw[0]
    kp = _kappa_of(P)
    f = _penalty(target, P)
    if f > _effective_tol(target, kp, tol):
        return None
    return WeightCertificate(P, kp, max(f, 0.0))


def _proj_spectraplex(Q):
    """Frobenius projection onto {Q Hermitian PSD, tr Q = 1}."""
    Q = 0.5 * (Q + Q.conj().T)
    w, U = np.linalg.eigh(Q)
    s = np.sort(w)[::-1]
    css = np.cumsum(s) - 1.0
    ks = np.arange(1, len(s) + 1)
    rho = ks[s - css / ks > 0][-1]
    theta = css[rho - 1] / rho
    return (U * np.maximum(w - theta, 0.0)) @ U.conj().T


_QSPACE_DIM_LIMIT = 160


def _qspace_rounds(target, kappa, tol, maxiter, Q0=None, ctx=None):
    """Convex margin minimization in right-hand-side space.

    For strictly stable single-constraint targets the defect map ``L`` is
    a bijection, so the cone {defect <= 0} is the image of PSD
    right-hand sides ``Q`` under the equation solve.  Feasibility at
    budget kappa amounts to ``psi(Q) = eig_max(P) - kappa^2 eig_min(P)
    <= 0`` with ``P = L^{-1}(-Q)``, which is convex in ``Q``; every
    iterate is exactly on the cone, so the best one doubles as a
    certificate at its own kappa.

    Returns ``(certificate_or_None, nearest_certificate_or_None)``.
    """
    n = target.dim
    kappa2 = kappa * kappa
    Q = _proj_spectraplex(Q0) if Q0 is not None else np.eye(n, dtype=_native_dtype(target)) / n
    best_rel = np.inf
    best_P = None
    window = 80
    window_best = np.inf
    for it in range(maxiter):
        P = _equation_solve(target, Q, ctx)
        if P is None:
            break
        w, U = np.linalg.eigh(P)
        if w[0] <= 0 or not np.all(np.isfinite(w)):
            break
        val = float(w[-1] - kappa2 * w[0])
        rel = val / float(w[-1])
        if rel < best_rel:
            best_rel, best_P = rel, P
        # acceptance is against the full spectral penalty, in which the
        # box excess eig_max(P) - kappa^2 counts like a defect violation
        if val <= _effective_tol(target, kappa, tol) * float(w[0]):
            Pn = P / w[0]
            f = _penalty(target, Pn)
            box = max(0.0, float(np.linalg.eigvalsh(Pn)[-1]) - kappa2)
            kp = _kappa_of(Pn)
            tol_eff = _effective_tol(target, kp, tol)
            if max(f, box) <= tol_eff:
                cert = WeightCertificate(Pn, kp, max(f, box, 0.0))
                return cert, cert
            # fell marginally outside the box; report as nearest
            break
        # window stall: require a 30% drop in the margin per window,
        # which a geometric phase passes and the O(1/sqrt k) tail fails
        if it > 0 and it % window == 0:
            if it >= 2 * window and best_rel > 0.7 * window_best:
                break
            window_best = best_rel
        umax, umin = U[:, -1], U[:, 0]
        M = np.outer(umax, umax.conj()) - kappa2 * np.outer(umin, umin.conj())
        Z = _equation_solve_adjoint(target, M, ctx)
        if Z is None:
            break
        G = -Z
        gn2 = float(np.sum(np.abs(G) ** 2))
        if gn2 <= 0:
            break
        Q = _proj_spectraplex(Q - (val / gn2) * G)
    nearest = None
    if best_P is not None:
        nearest = _cone_certificate(target, best_P, tol, ctx)
    return None, nearest


def _restoration_rounds(target, P, kappa, tol, rounds=60, ctx=None):
    """Alternate exact constraint restoration with box clipping.

    From any Hermitian PD ``P``, adding the equation solution for the
    positive part of the defect lands exactly on the constraint cone;
    rescaling to eig_min = 1 preserves it.  If the condition number then
    fits the budget we are done, otherwise the top eigenvalues are
    clipped and the defect this reopens is repaired in the next round.
    Returns ``(certificate_or_None, best_P, best_f)``.
    """
    kappa2 = kappa * kappa
    best_P, best_f = P, _penalty(target, P)
    for _ in range(rounds):
        D = _defects(target, P)[0]
        w, U = np.linalg.eigh(0.5 * (D + D.conj().T))
        f = float(w[-1])
        if f < best_f:
            best_P, best_f = P, f
        if f <= tol:
            kp = _kappa_of(P)
            if kp <= kappa * (1.0 + 1e-12):
                return WeightCertificate(P, kp, max(f, 0.0)), P, f
        if f > 0.0:
            Dplus = (U * np.maximum(w, 0.0)) @ U.conj().T
            X = _equation_solve(target, Dplus, ctx)
            if X is None:
                break
            P = P + X
            P = 0.5 * (P + P.conj().T)
        pw = np.linalg.eigvalsh(P)
        if pw[0] <= 0:
            break
        P = P / pw[0]
        top = pw[-1] / pw[0]
        if top <= kappa2 * (1.0 + 1e-12):
            # inside the box and (numerically) on the cone
            f = _penalty(target, P)
            if f < best_f:
                best_P, best_f = P, f
            if f <= tol:
                return WeightCertificate(P, _kappa_of(P), max(f, 0.0)), P, f
        else:
            P = _project_box(P, kappa2)
    return None, best_P, best_f


def _default_tol(target):
    return 1e-8 * target.scale()


def _effective_tol(target, kappa, tol):
    # float64 floor: forming the defect at weight scale kappa^2 already
    # carries rounding of this order.
    return max(tol, 8e-16 * target.scale() * kappa * kappa)


def _solve_feasibility(target, kappa, tol, maxiter, warm=None, qwarm=None, ctx=None):
    """Fixed-budget feasibility: seeds, restoration, then subgradients.

    Pipeline: closed-form candidates (identity, warm start, equation
    seed), exact restoration rounds onto the constraint cone, the convex
    right-hand-side search (strictly stable targets of moderate size),
    and finally the projected spectral-penalty subgradient with Polyak
    steps as the general-purpose fallback.  ``warm``/``qwarm`` carry the
    previous probe's weight and cone right-hand side across a bisection,
    and ``ctx`` a cached equation factorization.
    """
    n = target.dim
    kappa = float(kappa)
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    tol = _effective_tol(target, kappa, tol)
    kappa2 = kappa * kappa
    I = np.eye(n, dtype=_native_dtype(target))

    candidates = [I]
    if warm is not None:
        candidates.append(_project_box(warm, kappa2))
    seed = _equation_seed(target, ctx)
    if seed is not None:
        candidates.append(_project_box(seed, kappa2))
    eseed = _eigen_seed(target)
    if eseed is not None:
        candidates.append(_project_box(eseed, kappa2))
    sseed = _split_seed(target)
    if sseed is not None:
        candidates.append(_project_box(sseed, kappa2))

    best_P = None
    best_f = np.inf
    for P0 in candidates:
        f0 = _penalty(target, P0)
        if f0 < best_f:
            best_f, best_P = f0, P0
        if f0 <= tol:
            return FeasibilityResult(
                WeightCertificate(P0, _kappa_of(P0), max(f0, 0.0)), max(f0, 0.0), 0
            )

    if kappa2 <= 1.0 + 1e-14:
        # box is the singleton {I}; nothing to iterate
        return FeasibilityResult(None, best_f, 0)

    nearest = None
    stable = _is_strictly_stable(target)
    if ctx is None and stable:
        ctx = _EquationContext.for_target(target)
    if stable:
        cert, rest_P, rest_f = _restoration_rounds(target, best_P, kappa, tol, ctx=ctx)
        if cert is not None:
            return FeasibilityResult(cert, cert.residual, 0, nearest=cert)
        if rest_f < best_f:
            best_f, best_P = rest_f, rest_P
        nearest = _merge_nearest(nearest, _cone_certificate(target, rest_P, tol, ctx))
        if n <= _QSPACE_DIM_LIMIT:
            cert, near = _qspace_rounds(target, kappa, tol, maxiter, Q0=qwarm, ctx=ctx)
            nearest = _merge_nearest(nearest, near)
            if cert is not None:
                return FeasibilityResult(cert, cert.residual, 0, nearest=cert)
            # the convex search is conclusive up to its certificate gap;
            # the penalty fallback cannot improve on it for these targets
            return FeasibilityResult(None, best_f, 0, nearest)

    P = best_P
    target_level = 0.5 * tol
    since_improvement = 0
    reference_f = best_f
    it = 0
    for it in range(1, maxiter + 1):
        f, G = _penalty_and_subgradient(target, P)
        if f < best_f:
            best_f, best_P = f, P
        if f <= tol:
            return FeasibilityResult(
                WeightCertificate(P, _kappa_of(P), max(f, 0.0)), max(f, 0.0), it, nearest
            )
        gnorm2 = float(np.sum(np.abs(G) ** 2))
        if gnorm2 <= 0.0:
            break
        step = (f - target_level) / gnorm2
        P = _project_box(P - step * G, kappa2)

        # stall exit: Polyak converges geometrically on strictly feasible
        # instances, so a long flat stretch indicates (near-)infeasibility;
        # never exit before a minimum effort so near-critical feasible
        # probes are not misdeclared
        since_improvement += 1
        if best_f < reference_f * (1.0 - _STALL_IMPROVEMENT) or (reference_f - best_f) > tol:
            reference_f = best_f
            since_improvement = 0
        elif since_improvement >= _STALL_WINDOW and it >= _MIN_ITER_BEFORE_STALL:
            break
    if stable and best_P is not None:
        nearest = _merge_nearest(nearest, _cone_certificate(target, best_P, tol, ctx))
    return FeasibilityResult(None, best_f, it, nearest)


def _native_dtype(target):
    if isinstance(target, SteinTarget):
        return target.operators[0].dtype
    return target.generator.dtype


def _realified(target):
    """Work in real arithmetic when every entry is exactly real.

    For real data the constraint set is invariant under entrywise
    conjugation and averaging, so a real symmetric optimal weight exists;
    real eigen/Schur kernels are substantially cheaper.
    """
    if isinstance(target, SteinTarget):
        if all(np.all(T.imag == 0.0) for T in target.operators):
            return SteinTarget(tuple(np.ascontiguousarray(T.real) for T in target.operators))
        return target
    A = target.generator
    if np.all(A.imag == 0.0):
        return LyapunovTarget(np.ascontiguousarray(A.real), target.shift)
    return target


def _merge_nearest(a, b):
    if b is None:
        return a
    if a is None or b.kappa < a.kappa:
        return b
    return a


# ---------------------------------------------------------------------------
# public feasibility surface


def stein_feasible(operators, kappa, tol=None, maxiter=MAXITER_DEFAULT, warm=None):
    """Search for ``P`` with ``I <= P <= kappa^2 I`` and ``Ti* P Ti <= P``.

    Parameters
    ----------
    operators : sequence of array_like
        The operators that must become joint contractions; all square of
        one dimension.
    kappa : float
        Condition budget, ``>= 1``.
    tol : float, optional
        Feasibility threshold on the worst defect eigenvalue, in
        operator-norm units.

    Returns
    -------
    FeasibilityResult
        ``certificate`` is None when no weight was found within the
        iteration budget; ``best_residual`` reports how close the search
        came.
    """
    ops = tuple(as_matrix(T, f"operators[{i}]") for i, T in enumerate(operators))
    if not ops:
        raise DimensionError("at least one operator is required")
    if len({T.shape[0] for T in ops}) != 1:
        raise DimensionError("all operators must share one dimension")
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    target = _realified(SteinTarget(ops))
    if tol is None:
        tol = _default_tol(target)
    return _self_warming_solve(target, kappa, tol, maxiter, warm)


def lyapunov_feasible(A, shift, kappa, tol=None, maxiter=MAXITER_DEFAULT, warm=None):
    """Search for ``P`` with ``I <= P <= kappa^2 I`` and ``A*P + PA <= 2 shift P``.

    A certificate makes ``exp(-shift t) exp(tA)`` a joint contraction in
    the ``P`` inner product for all ``t >= 0``.
    """
    A = as_matrix(A, "generator")
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    target = _realified(LyapunovTarget(A, float(shift)))
    if tol is None:
        tol = _default_tol(target)
    return _self_warming_solve(target, kappa, tol, maxiter, warm)


def _self_warming_solve(target, kappa, tol, maxiter, warm):
    """Single-shot feasibility with the warm restarts a bisection would get.

    A stalled convex-margin search restarted from its own best cone point
    resumes progress, so near-critical budgets resolve in a few rounds.
    """
    res = _solve_feasibility(target, kappa, tol, maxiter, warm=warm)
    for _ in range(3):
        if res or res.nearest is None:
            return res
        near = res.nearest
        if near.kappa > kappa * (1.0 + 0.05):
            return res
        D = _defects(target, near.weight)[0]
        qwarm = -0.5 * (D + D.conj().T)
        again = _solve_feasibility(
            target, kappa, tol, maxiter, warm=near.weight, qwarm=qwarm
        )
        if again.nearest is not None and (
            res.nearest is None or again.nearest.kappa >= near.kappa * (1.0 - 1e-12)
        ):
            if not again:
                # no progress from the restart
                res = FeasibilityResult(
                    again.certificate,
                    min(res.best_residual, again.best_residual),
                    again.iterations,
                    _merge_nearest(res.nearest, again.nearest),
                )
                if again.nearest.kappa >= near.kappa * (1.0 - 1e-9):
                    return res
                continue
        res = again
    return res


# ---------------------------------------------------------------------------
# lower bounds and unbounded evidence


def _discrete_norm_floor(T, kappa_max):
    """Lower bound on C(T) from power norms; also detects norm blow-up.

    ``norm(T^k) <= C(T)`` for every k, so the largest probed power norm
    is a valid bracket floor.  Powers are probed by repeated squaring.
    """
    lb = max(1.0, operator_norm(T))
    M = T.copy()
    for _ in range(40):
        nrm = operator_norm(M)
        lb = max(lb, nrm)
        if nrm > kappa_max or not np.isfinite(nrm) or nrm > 1e30:
            break
        M = M @ M
    return lb


def _continuous_norm_floor(A, shift, kappa_max):
    """Lower bound on the shifted joint constant from a log time grid."""
    Abar = A - shift * np.eye(A.shape[0])
    sem = semigroup_from_generator(Abar)
    lb = 1.0
    for t in np.logspace(-2, 8, 41):
        try:
            nrm = operator_norm(sem.eval(t))
        except Exception:
            return np.inf
        if not np.isfinite(nrm):
            return np.inf
        lb = max(lb, nrm)
        if lb > kappa_max:
            break
    return lb


# ---------------------------------------------------------------------------
# bisection driver


def _bisect_constant(target, lower, kappa_max, rel_tol, feas_tol, maxiter):
    """Log-scale bisection over kappa with warm-started feasibility probes.

    An infeasible probe may still surface a certificate slightly above
    its budget (see :class:`FeasibilityResult`); the upper bracket is
    tightened with every certificate seen, so the reported constant is
    always backed by an actual weight.  Returns ``(verdict_status,
    certificate, searched_kappa_max)``.
    """
    lower = max(1.0, lower)
    warm = None
    qwarm = None
    best_cert = None
    stable = _is_strictly_stable(target)
    ctx = _EquationContext.for_target(target) if stable else None

    def probe(kap):
        res = _solve_feasibility(
            target, kap, feas_tol, maxiter, warm=warm, qwarm=qwarm, ctx=ctx
        )
        absorb(res)
        return res

    def absorb(res):
        nonlocal best_cert, warm, qwarm
        for cert in (res.certificate, res.nearest):
            if cert is not None and (best_cert is None or cert.kappa < best_cert.kappa):
                best_cert = cert
                warm = cert.weight
                if stable:
                    D = _defects(target, cert.weight)[0]
                    qwarm = -0.5 * (D + D.conj().T)

    res = probe(lower)
    if res:
        return "finite", best_cert, lower

    # locate a feasible upper bracket; the equation and eigen seeds, when
    # they exist, are certificates themselves and cap the search
    if best_cert is None:
        for seed in (_equation_seed(target, ctx), _eigen_seed(target), _split_seed(target)):
            if seed is None:
                continue
            kappa_seed = _kappa_of(seed)
            if kappa_seed > kappa_max:
                continue
            f_seed = _penalty(target, seed)
            if f_seed <= _effective_tol(target, kappa_seed, feas_tol):
                if best_cert is None or kappa_seed < best_cert.kappa:
                    best_cert = WeightCertificate(seed, kappa_seed, max(f_seed, 0.0))
                    warm = seed
    if best_cert is None:
        kap = max(2.0 * lower, 2.0)
        while kap <= kappa_max * (1.0 + 1e-12):
            if probe(kap):
                break
            kap *= 4.0
        if best_cert is None and kap / 4.0 < kappa_max:
            probe(kappa_max)
    if best_cert is None or best_cert.kappa > kappa_max * (1.0 + 1e-9):
        return "infeasible", None, kappa_max

    lo = lower
    hi = max(best_cert.kappa, lo)
    while hi > lo * (1.0 + rel_tol):
        # geometric bisection while the bracket is wide; once it tightens,
        # probe exactly one tolerance below the certificate so the final
        # gap closes in a single solve
        mid = max(min(math.sqrt(lo * hi), hi / (1.0 + rel_tol)), lo)
        res = probe(mid)
        if res:
            hi = min(mid, max(best_cert.kappa, lo))
        else:
            lo = mid
            hi = max(lo, min(hi, best_cert.kappa))
    return "finite", best_cert, hi


def discrete_similarity_constant(
    T, tol=1e-4, kappa_max=KAPPA_MAX_DEFAULT, feas_tol=None, maxiter=MAXITER_DEFAULT
):
    """Similarity constant C(T) of a single operator, with certificate.

    Bisects the condition budget over the power-closed singleton ``{T}``:
    a Stein certificate for ``T`` covers every power ``T^k`` by
    congruence, so no explicit power constraints are needed.  ``tol`` is
    the relative bracket width.

    Verdicts: ``unbounded`` on spectral evidence (``r(T) > 1``, or power
    norms exceeding the budget, which bound C(T) from below); otherwise
    ``finite`` with certificate, or ``infeasible`` past ``kappa_max``.
    """
    T = as_matrix(T)
    r = spectral_radius(T)
    if r > 1.0 + 1e-10:
        return SimilarityVerdict(
            "unbounded", math.inf, None, 0.0, evidence=f"spectral radius {r:.12g} > 1"
        )
    floor = _discrete_norm_floor(T, kappa_max)
    if floor > kappa_max:
        return SimilarityVerdict(
            "unbounded",
            math.inf,
            None,
            kappa_max,
            evidence=f"power norms reach {floor:.3g} > budget (defective peripheral spectrum)",
        )
    target = _realified(SteinTarget((T,)))
    if feas_tol is None:
        feas_tol = _default_tol(target)
    status, cert, searched = _bisect_constant(target, floor, kappa_max, tol, feas_tol, maxiter)
    if status != "finite":
        return SimilarityVerdict("infeasible", math.inf, None, searched)
    return SimilarityVerdict("finite", cert.kappa, cert, searched)


def _shifted_constant(A, shift, tol, kappa_max, feas_tol, maxiter):
    A = as_matrix(A, "generator")
    gb = growth_bound(A)
    if gb > shift + 1e-10:
        return SimilarityVerdict(
            "unbounded",
            math.inf,
            None,
            0.0,
            evidence=f"growth bound {gb:.12g} exceeds shift {shift:.12g}",
        )
    floor = _continuous_norm_floor(A, shift, kappa_max)
    if floor > kappa_max:
        return SimilarityVerdict(
            "unbounded",
            math.inf,
            None,
            kappa_max,
            evidence="semigroup norms exceed the budget (marginal defective spectrum)",
        )
    target = _realified(LyapunovTarget(A, float(shift)))
    if feas_tol is None:
        feas_tol = _default_tol(target)
    status, cert, searched = _bisect_constant(target, floor, kappa_max, tol, feas_tol, maxiter)
    if status != "finite":
        return SimilarityVerdict("infeasible", math.inf, None, searched)
    return SimilarityVerdict("finite", cert.kappa, cert, searched)


def joint_similarity_constant(
    A, tol=1e-4, kappa_max=KAPPA_MAX_DEFAULT, feas_tol=None, maxiter=MAXITER_DEFAULT
):
    """Joint similarity constant of the semigroup ``t -> exp(tA)``.

    A Lyapunov certificate ``A*P + PA <= 0`` renorms every ``exp(tA)``
    into a contraction simultaneously; bisection over the condition
    budget yields the constant within relative ``tol``.
    """
    return _shifted_constant(A, 0.0, tol, kappa_max, feas_tol, maxiter)


def quasi_similarity_constant(
    A, shift, tol=1e-4, kappa_max=KAPPA_MAX_DEFAULT, feas_tol=None, maxiter=MAXITER_DEFAULT
):
    """Similarity constant of the rescaled semigroup ``exp(-shift t) exp(tA)``."""
    return _shifted_constant(A, float(shift), tol, kappa_max, feas_tol, maxiter)


def min_quasi_shift(
    A, kappa_budget, tol=1e-3, feas_tol=None, maxiter=MAXITER_DEFAULT
):
    """Smallest shift admitting a certificate within the condition budget.

    Bisects over ``shift`` in ``[growth_bound(A), numerical_abscissa(A)]``;
    the upper endpoint is always feasible with ``P = I``, and feasibility
    is monotone in the shift.  Returns the certified-feasible end of the
    final bracket (an endpoint when the bracket is numerically empty).
    """
    A = as_matrix(A, "generator")
    if kappa_budget < 1.0:
        raise ValueError("kappa_budget must be >= 1")
    lo = growth_bound(A)
    hi = numerical_abscissa(A)
    if not hi - lo > tol:
        return lo
    target_scale = max(1.0, 2.0 * operator_norm(A))
    if feas_tol is None:
        feas_tol = 1e-8 * target_scale

    def feasible(lam, warm=None):
        return lyapunov_feasible(
            A, lam, kappa_budget, tol=feas_tol, maxiter=maxiter, warm=warm
        )

    res_lo = feasible(lo)
    if res_lo:
        return lo
    warm = None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        res = feasible(mid, warm=warm)
        if res:
            hi = mid
            warm = res.certificate.weight
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# independent certificate verification


@dataclass(frozen=True)
class CertificateReport:
    """Re-derived certificate quantities, independent of the solver path."""

    kappa: float
    residual: float
    constraint_violations: tuple
    box_violation: float

    @property
    def worst(self):
        return max(self.residual, self.box_violation)


def certificate_check(cert, target):
    """Recompute all constraint violations and kappa for a certificate.

    ``target`` is a :class:`SteinTarget` or :class:`LyapunovTarget`.  The
    defect eigenvalues are recomputed from scratch and ``kappa`` via
    singular values, so a buggy solver cannot vouch for itself.
    """
    P = as_matrix(cert.weight, "certificate weight")
    if P.shape[0] != target.dim:
        raise DimensionError("certificate and target dimensions differ")
    sv = scipy.linalg.svdvals(0.5 * (P + P.conj().T))
    kappa = float(math.sqrt(sv[0] / max(sv[-1], np.finfo(float).tiny)))
    violations = []
    for D in _defects(target, P):
        lam = float(np.linalg.eigvalsh(0.5 * (D + D.conj().T))[-1])
        violations.append(max(lam, 0.0))
    w = np.linalg.eigvalsh(0.5 * (P + P.conj().T))
    box = max(0.0, 1.0 - float(w[0]))
    return CertificateReport(
        kappa=kappa,
        residual=max(violations) if violations else 0.0,
        constraint_violations=tuple(violations),
        box_violation=box,
    )
