"""Elasticity data and its reduction to one space dimension.

Index convention: the physical indices 1..n are stored as 0..n-1, so the
"11" component of any tensor is ``[0, 0]`` (or ``[0, 0, 0, 0]``).  ``D`` is
stored as ``D[i, j, k, l] = D^{ij}_{kl}`` and acts on symmetric matrices by
``(D s)_{ij} = sum_{kl} D[i, j, k, l] s[k, l]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TOL = 1e-12


class ElasticError(ValueError):
    pass


class DivisionGuard(ElasticError):
    """D^{11}_{11} vanishes, so the 1D reduction is undefined."""


def sym_matrix(entries, n: int | None = None) -> np.ndarray:
    a = np.asarray(entries, dtype=float)
    if a.ndim == 1:
        if n is None:
            n = math.isqrt(a.size)
        a = a.reshape(n, n)
    if a.shape[0] != a.shape[1]:
        raise ElasticError(f"matrix must be square, got shape {a.shape}")
    if np.max(np.abs(a - a.T), initial=0.0) > TOL:
        raise ElasticError("matrix is not symmetric")
    return a


def isotropic_tensor(n: int, shear: float, bulk: float) -> np.ndarray:
    """D with D s = 2*shear*s + bulk*tr(s)*I."""
    d = np.eye(n)
    return (bulk * np.einsum("ij,kl->ijkl", d, d)
            + shear * (np.einsum("ik,jl->ijkl", d, d) + np.einsum("il,jk->ijkl", d, d)))


def apply(D: np.ndarray, s: np.ndarray) -> np.ndarray:
    return np.einsum("ijkl,kl->ij", D, s)


def ddot(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(a * b))


def sym_basis(n: int) -> list:
    """Orthonormal basis of the symmetric n x n matrices (Frobenius product)."""
    out = []
    for i in range(n):
        for j in range(i, n):
            b = np.zeros((n, n))
            if i == j:
                b[i, i] = 1.0
            else:
                b[i, j] = b[j, i] = 1.0 / math.sqrt(2.0)
            out.append(b)
    return out


def operator_matrix(D: np.ndarray) -> np.ndarray:
    """Matrix of D restricted to symmetric matrices, in ``sym_basis``."""
    basis = sym_basis(D.shape[0])
    return np.array([[ddot(a, apply(D, b)) for b in basis] for a in basis])


@dataclass(frozen=True)
class ElasticSystem:
    D: np.ndarray
    eps0: np.ndarray
    eps1: np.ndarray

    @property
    def n(self) -> int:
        return self.D.shape[0]

    @property
    def d1111(self) -> float:
        return float(self.D[0, 0, 0, 0])

    @classmethod
    def isotropic(cls, n, shear, bulk, eps0=None, eps1=None):
        z = np.zeros((n, n))
        return cls(isotropic_tensor(n, shear, bulk),
                   z if eps0 is None else sym_matrix(eps0, n),
                   z if eps1 is None else sym_matrix(eps1, n))


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    minor_residual: float
    major_residual: float
    c: float
    d1111: float
    reasons: tuple = ()


def validate(system: ElasticSystem) -> ValidationReport:
    D = np.asarray(system.D, dtype=float)
    n = D.shape[0]
    reasons = []
    if D.shape != (n, n, n, n) or system.eps0.shape != (n, n) or system.eps1.shape != (n, n):
        return ValidationReport(False, math.inf, math.inf, math.nan, math.nan, ("dimension mismatch",))
    minor = max(np.max(np.abs(D - D.transpose(1, 0, 2, 3))), np.max(np.abs(D - D.transpose(0, 1, 3, 2))))
    major = np.max(np.abs(D - D.transpose(2, 3, 0, 1)))
    c = float(np.min(np.linalg.eigvalsh(operator_matrix(D))))
    if minor > TOL:
        reasons.append("minor symmetry")
    if major > TOL:
        reasons.append("major symmetry")
    if not c > TOL:
        reasons.append("positive definiteness")
    if abs(D[0, 0, 0, 0]) <= TOL:
        reasons.append("D^11_11 = 0")
    for name, e in (("eps0", system.eps0), ("eps1", system.eps1)):
        if np.max(np.abs(e - e.T)) > TOL:
            reasons.append(f"{name} symmetry")
    return ValidationReport(not reasons, float(minor), float(major), c, float(D[0, 0, 0, 0]), tuple(reasons))


def _guard(system: ElasticSystem) -> float:
    d = system.d1111
    if abs(d) <= TOL:
        raise DivisionGuard("D^11_11 = 0")
    return d


def check_a1(system: ElasticSystem) -> np.ndarray:
    """r_i = D^{11}_{11} (D^{i1}:eps1) - D^{i1}_{11} (D^{11}:eps1)."""
    D = system.D
    De1 = apply(D, system.eps1)
    return D[0, 0, 0, 0] * De1[:, 0] - D[:, 0, 0, 0] * De1[0, 0]


def check_a2(system: ElasticSystem) -> float:
    D, e1 = system.D, system.eps1
    De1 = apply(D, e1)
    d11_e1 = ddot(D[:, :, 0, 0], e1)  # D_{11} : eps1
    return d11_e1 * De1[0, 0] - D[0, 0, 0, 0] * ddot(De1, e1)


@dataclass(frozen=True)
class ReducedCoefficients:
    """T = sigma*T11 + tau0 + tau1*v and T:eps1 = alpha*T11 + beta + gamma*v."""

    sigma: np.ndarray
    tau0: np.ndarray
    tau1: np.ndarray
    alpha: float
    beta: float
    gamma: float = 0.0

    def mu(self, t11: float) -> float:
        return self.alpha * t11 + self.beta


def reduce(system: ElasticSystem) -> ReducedCoefficients:
    d = _guard(system)
    D = system.D
    col = D[:, :, 0, 0]
    sigma = col / d
    taus = []
    for e in (system.eps0, system.eps1):
        De = apply(D, e)
        taus.append((col * De[0, 0] - d * De) / d)
    tau0, tau1 = taus
    e1 = system.eps1
    return ReducedCoefficients(
        sigma=sigma,
        tau0=tau0,
        tau1=tau1,
        alpha=ddot(sigma, e1),
        beta=ddot(tau0, e1),
        gamma=ddot(tau1, e1),
    )


def stress(coeffs: ReducedCoefficients, t11: float, v: float) -> np.ndarray:
    return coeffs.sigma * t11 + coeffs.tau0 + coeffs.tau1 * v


def displacement_gradient(system: ElasticSystem, t11: float, v: float) -> float:
    d = _guard(system)
    D1 = system.D[0, 0]
    return (t11 + ddot(D1, system.eps0) + ddot(D1, system.eps1) * v) / d


def full_stress(system: ElasticSystem, w: float, v: float) -> np.ndarray:
    """T = D(eps - eps0 - eps1 v) for the uniaxial strain eps = w e1 (x) e1."""
    eps = np.zeros((system.n, system.n))
    eps[0, 0] = w
    return apply(system.D, eps - system.eps0 - system.eps1 * v)


def jump_w(system: ElasticSystem, v_minus: float, v_plus: float) -> float:
    d = _guard(system)
    return ddot(system.D[0, 0], system.eps1) * (v_plus - v_minus) / d


@dataclass
class ReductionReport:
    validation: ValidationReport
    a1_residual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a2_residual: float = math.nan
    coeffs: ReducedCoefficients | None = None
    jump: float | None = None

    @property
    def a1_failed(self) -> bool:
        return bool(np.max(np.abs(self.a1_residual), initial=0.0) > TOL)

    @property
    def a2_failed(self) -> bool:
        return not abs(self.a2_residual) <= TOL

    def to_json(self) -> dict:
        v = self.validation
        out = {
            "valid": v.valid,
            "c": v.c,
            "d1111": v.d1111,
            "reasons": list(v.reasons),
            "a1_residual": [float(r) for r in self.a1_residual],
            "a2_residual": float(self.a2_residual),
            "a1_failed": self.a1_failed,
            "a2_failed": self.a2_failed,
        }
        if self.coeffs is not None:
            c = self.coeffs
            out.update(alpha=c.alpha, beta=c.beta, gamma=c.gamma,
                       sigma=c.sigma.tolist(), tau0=c.tau0.tolist(), tau1=c.tau1.tolist())
        if self.jump is not None:
            out["jump_w"] = self.jump
        return out


def reduction_report(system: ElasticSystem, v_minus: float = -1.0, v_plus: float = 1.0) -> ReductionReport:
    val = validate(system)
    if not val.valid:
        return ReductionReport(val)
    return ReductionReport(val, check_a1(system), check_a2(system), reduce(system),
                           jump_w(system, v_minus, v_plus))
