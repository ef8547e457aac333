"""Dense strictly convex QP solver for small inequality-constrained problems.

minimize 1/2 z'Pz + q'z  subject to  A z <= b

Solved by a primal active-set method.  Sizes here are tiny (a handful of
variables and rows, solved once per control step), so factorizations are
recomputed per solve and no sparsity is exploited.  An exhaustive
active-set enumeration oracle is provided for testing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ParameterError

__all__ = ["QpProblem", "QpSolution", "QpStatus", "solve_qp", "kkt_residuals", "enumerate_oracle"]


class QpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class QpProblem:
    """minimize 1/2 z'Pz + q'z subject to A z <= b, with P symmetric PD."""

    P: np.ndarray
    q: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        P = np.asarray(self.P, dtype=float)
        q = np.asarray(self.q, dtype=float)
        A = np.asarray(self.A, dtype=float).reshape(-1, P.shape[0])
        b = np.asarray(self.b, dtype=float).reshape(-1)
        n = P.shape[0]
        if P.shape != (n, n) or q.shape != (n,):
            raise ParameterError(f"inconsistent dimensions: P {P.shape}, q {q.shape}")
        if A.shape[0] != b.shape[0]:
            raise ParameterError(f"A has {A.shape[0]} rows but b has {b.shape[0]}")
        if not np.allclose(P, P.T, atol=1e-10 * max(1.0, float(np.abs(P).max()))):
            raise ParameterError("P must be symmetric")
        try:
            np.linalg.cholesky(P)
        except np.linalg.LinAlgError:
            raise ParameterError("P must be positive definite") from None
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def objective(self, z: np.ndarray) -> float:
        return float(0.5 * z @ self.P @ z + self.q @ z)

    def tolerance(self) -> float:
        return 1e-8 * max(1.0, float(np.linalg.norm(self.q)))


@dataclass(frozen=True)
class QpSolution:
    z: np.ndarray
    lam: np.ndarray
    status: QpStatus
    objective: float
    iterations: int = 0


def _kkt_solve(P: np.ndarray, g: np.ndarray, A_w: np.ndarray, rhs_w: np.ndarray):
    """Solve the equality-constrained KKT system; lstsq fallback for rank defects."""
    n = P.shape[0]
    k = A_w.shape[0]
    if k == 0:
        return np.linalg.solve(P, -g), np.empty(0)
    kkt = np.zeros((n + k, n + k))
    kkt[:n, :n] = P
    kkt[:n, n:] = A_w.T
    kkt[n:, :n] = A_w
    rhs = np.concatenate([-g, rhs_w])
    try:
        sol = np.linalg.solve(kkt, rhs)
        if not np.all(np.isfinite(sol)):
            raise np.linalg.LinAlgError
        # a numerically singular matrix (duplicated working rows) can pass
        # the LU solve with garbage values; check the residual
        res = np.linalg.norm(kkt @ sol - rhs)
        if res > 1e-8 * max(1.0, float(np.linalg.norm(rhs))):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:n], sol[n:]


def _active_set(prob: QpProblem, z: np.ndarray, max_iter: int) -> QpSolution:
    """Primal active-set iteration from a feasible point z."""
    P, q, A, b = prob.P, prob.q, prob.A, prob.b
    n, m = prob.n, prob.m
    scale = 1e-9 * np.maximum(1.0, np.abs(b)) if m else np.empty(0)
    work = [i for i in range(m) if A[i] @ z - b[i] >= -scale[i]]

    for it in range(1, max_iter + 1):
        g = P @ z + q
        A_w = A[work] if work else np.empty((0, n))
        # drive working rows exactly onto their boundaries (the start may
        # sit slightly inside after the feasibility repair)
        p, lam_w = _kkt_solve(P, g, A_w, b[work] - A_w @ z)

        if np.linalg.norm(p, ord=np.inf) <= 1e-11 * max(1.0, float(np.linalg.norm(z, ord=np.inf))):
            if len(work) == 0 or np.min(lam_w) >= -1e-11:
                lam = np.zeros(m)
                for idx, lw in zip(work, lam_w):
                    lam[idx] = max(lw, 0.0)
                return QpSolution(z, lam, QpStatus.OPTIMAL, prob.objective(z), it)
            # drop the most negative multiplier; ties broken by lowest row index
            worst = min(range(len(work)), key=lambda j: (lam_w[j], work[j]))
            work.pop(worst)
            continue

        # step to the nearest blocking constraint (lowest index on ties)
        alpha = 1.0
        blocker = -1
        for i in range(m):
            if i in work:
                continue
            d = A[i] @ p
            if d > 1e-12:
                ratio = max((b[i] - A[i] @ z) / d, 0.0)
                if ratio < alpha - 1e-12:
                    alpha = ratio
                    blocker = i
        z = z + alpha * p
        if blocker >= 0:
            work.append(blocker)
            work.sort()

    return QpSolution(z, np.zeros(m), QpStatus.DEGENERATE, prob.objective(z), max_iter)


def _phase1(prob: QpProblem, z0: np.ndarray) -> np.ndarray | None:
    """Find a feasible point by minimizing the worst constraint violation.

    Solves min 1/2 s^2 + eps/2 ||z||^2 s.t. Az - s <= b, -s <= 0 with the
    same active-set core, starting from (z0, max violation).  The
    regularization leaves a residual violation of order eps, so the
    candidate is repaired by pushing the near-active rows strictly
    inside before it is accepted.  Returns None when the minimal
    violation stays bounded away from zero (infeasible problem).
    """
    n, m = prob.n, prob.m
    eps = 1e-12
    P1 = np.eye(n + 1) * eps
    P1[n, n] = 1.0
    q1 = np.zeros(n + 1)
    A1 = np.zeros((m + 1, n + 1))
    A1[:m, :n] = prob.A
    A1[:m, n] = -1.0
    A1[m, n] = -1.0
    b1 = np.concatenate([prob.b, [0.0]])
    aug = QpProblem(P1, q1, A1, b1)
    s0 = max(0.0, float(np.max(prob.A @ z0 - prob.b)))
    start = np.concatenate([z0, [s0]])
    sol = _active_set(aug, start, 50 * (n + 1 + m + 1))
    scale = max(1.0, float(np.linalg.norm(prob.b, ord=np.inf)))
    if sol.status is not QpStatus.OPTIMAL or sol.z[n] > 1e-6 * scale:
        return None

    z = sol.z[:n]
    push = max(2.0 * float(sol.z[n]), 1e-12 * scale)
    for _ in range(3):
        r = prob.A @ z - prob.b
        if np.all(r <= 0.0):
            return z
        mask = r >= -push
        A_v = prob.A[mask]
        target = (prob.b[mask] - push) - A_v @ z
        dz = np.linalg.lstsq(A_v, target, rcond=None)[0]
        z = z + dz
        push *= 2.0
    return z if np.all(prob.A @ z <= prob.b) else None


def solve_qp(prob: QpProblem, z_start: np.ndarray | None = None) -> QpSolution:
    """Solve the QP by primal active set from the unconstrained minimizer.

    ``z_start`` may supply a known feasible point to skip the
    feasibility phase (it is verified before use).
    """
    max_iter = 50 * (prob.n + prob.m)
    z_uc = np.linalg.solve(prob.P, -prob.q)
    if prob.m == 0:
        return QpSolution(z_uc, np.empty(0), QpStatus.OPTIMAL, prob.objective(z_uc), 0)

    tol = prob.tolerance()
    if np.all(prob.A @ z_uc <= prob.b + tol):
        return QpSolution(z_uc, np.zeros(prob.m), QpStatus.OPTIMAL, prob.objective(z_uc), 0)

    if z_start is not None and np.all(prob.A @ z_start <= prob.b + 1e-12 * np.maximum(1.0, np.abs(prob.b))):
        return _active_set(prob, np.asarray(z_start, dtype=float), max_iter)

    z0 = _phase1(prob, z_uc)
    if z0 is None:
        return QpSolution(z_uc, np.zeros(prob.m), QpStatus.INFEASIBLE, float("inf"), 0)
    return _active_set(prob, z0, max_iter)


def kkt_residuals(prob: QpProblem, sol: QpSolution) -> tuple[float, float, float, float]:
    """Max-norm KKT residuals: stationarity, primal, dual, complementarity."""
    z, lam = sol.z, sol.lam
    stationarity = float(np.linalg.norm(prob.P @ z + prob.q + prob.A.T @ lam, ord=np.inf))
    if prob.m:
        slack = prob.A @ z - prob.b
        primal = float(max(0.0, np.max(slack)))
        dual = float(max(0.0, np.max(-lam)))
        comp = float(np.max(np.abs(lam * slack)))
    else:
        primal = dual = comp = 0.0
    return stationarity, primal, dual, comp


def enumerate_oracle(prob: QpProblem, tol: float | None = None) -> QpSolution:
    """Brute-force reference: try every active set, keep the best KKT point.

    Only meant for testing; limited to m <= 12 constraints.
    """
    if prob.m > 12:
        raise ParameterError(f"enumeration oracle limited to m <= 12, got {prob.m}")
    if tol is None:
        tol = prob.tolerance()

    best: QpSolution | None = None
    for mask in range(1 << prob.m):
        active = [i for i in range(prob.m) if mask & (1 << i)]
        A_w = prob.A[active] if active else np.empty((0, prob.n))
        z, lam_w = _kkt_solve(prob.P, prob.q, A_w, prob.b[active])
        if not np.all(np.isfinite(z)):
            continue
        if active and np.linalg.norm(A_w @ z - prob.b[active], ord=np.inf) > 1e-7 * max(
            1.0, float(np.abs(prob.b).max())
        ):
            continue  # rank-deficient active set, inconsistent
        if not np.all(prob.A @ z <= prob.b + tol):
            continue
        if active and np.min(lam_w) < -tol:
            continue
        lam = np.zeros(prob.m)
        for idx, lw in zip(active, lam_w):
            lam[idx] = max(lw, 0.0)
        obj = prob.objective(z)
        if best is None or obj < best.objective - 1e-12:
            best = QpSolution(z, lam, QpStatus.OPTIMAL, obj)
    if best is None:
        return QpSolution(
            np.zeros(prob.n), np.zeros(prob.m), QpStatus.INFEASIBLE, float("inf")
        )
    return best
