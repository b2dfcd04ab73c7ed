"""q-convolution and q-middle convolution.

Generic numerical routines for any system size, plus the closed-form
Jimbo-Sakai instance on both lambda branches:

* ``"chi2"``: q**lambda = chi2 t a1 a2 / theta1, L spanned by (0,1,0,1,0,1)
* ``"chi1"``: q**lambda = chi1 t a1 a2 / theta1, L spanned by (1,0,1,0,1,0)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParameterError, InvalidInputError, MapSingularityError, RankAmbiguityError
from .numerics import ZETA, safe_div
from .qpvi import MatrixPolynomial, PartialFractionSystem, QPVIParams, build_A, build_B, kernel_vectors

BRANCHES = ("chi2", "chi1")


@dataclass(frozen=True)
class ConvolutionTuple:
    f_inf: np.ndarray
    f: tuple  # F_1 .. F_N
    f_hat: np.ndarray
    q_lambda: complex
    poles: tuple

    @property
    def matrices(self) -> tuple:
        """(F_inf, F_1, ..., F_N)."""
        return (self.f_inf,) + tuple(self.f)

    def as_system(self) -> PartialFractionSystem:
        return PartialFractionSystem(self.f_inf, self.poles, self.f)


@dataclass(frozen=True)
class SubspacePair:
    k_basis: np.ndarray  # columns
    l_basis: np.ndarray
    sum_basis: np.ndarray  # orthonormal columns spanning K + L
    complement_basis: np.ndarray  # orthonormal columns spanning (K + L)^perp

    @property
    def dim_k(self) -> int:
        return self.k_basis.shape[1]

    @property
    def dim_l(self) -> int:
        return self.l_basis.shape[1]


def q_convolution(sys: PartialFractionSystem, q_lambda) -> ConvolutionTuple:
    m, n = sys.size, len(sys.poles)
    blocks = [sys.b0] + list(sys.residues)
    row = np.hstack(blocks)
    size = (n + 1) * m
    f_hat = np.vstack([row] * (n + 1))
    fs = []
    for i in range(1, n + 1):
        fi = np.zeros((size, size), dtype=np.complex128)
        fi[i * m:(i + 1) * m, :] = row
        fi[i * m:(i + 1) * m, i * m:(i + 1) * m] -= (1 - q_lambda) * np.eye(m)
        fs.append(fi)
    return ConvolutionTuple(np.eye(size) - f_hat, tuple(fs), f_hat, complex(q_lambda), sys.poles)


def _nullspace(mat: np.ndarray, tol: float) -> np.ndarray:
    """Right nullspace by singular-value thresholding at tol * sigma_max.

    Raises RankAmbiguityError when a singular value sits within a factor
    of 10 of the threshold.
    """
    _, sv, vh = np.linalg.svd(mat)
    smax = sv[0] if sv.size else 0.0
    if smax == 0:
        return np.eye(mat.shape[1], dtype=np.complex128)
    thresh = tol * smax
    for s in sv:
        if thresh / 10 < s < thresh * 10:
            raise RankAmbiguityError(s / thresh)
    rank = int(np.sum(sv > thresh))
    return vh[rank:].conj().T


def _span(vectors: np.ndarray, tol: float):
    """Orthonormal bases of span(columns) and of its orthogonal complement."""
    if vectors.shape[1] == 0:
        return vectors, np.eye(vectors.shape[0], dtype=np.complex128)
    u, sv, _ = np.linalg.svd(vectors)
    thresh = tol * sv[0]
    for s in sv:
        if thresh / 10 < s < thresh * 10:
            raise RankAmbiguityError(s / thresh)
    rank = int(np.sum(sv > thresh))
    return u[:, :rank], u[:, rank:]


def compute_subspaces(sys: PartialFractionSystem, tup: ConvolutionTuple, tol: float = 1e-9) -> SubspacePair:
    if tol < ZETA:
        raise InvalidInputError("tol must be at least ZETA")
    m, n = sys.size, len(sys.poles)
    size = (n + 1) * m
    cols = []
    for j, block in enumerate([sys.b0] + list(sys.residues)):
        for v in _nullspace(block, tol).T:
            col = np.zeros(size, dtype=np.complex128)
            col[j * m:(j + 1) * m] = v
            cols.append(col)
    k_basis = np.array(cols).T if cols else np.zeros((size, 0), dtype=np.complex128)
    l_basis = _nullspace(tup.f_hat - (1 - tup.q_lambda) * np.eye(size), tol)
    sum_basis, complement = _span(np.hstack([k_basis, l_basis]), tol)
    return SubspacePair(k_basis, l_basis, sum_basis, complement)


def invariance_defect(tup: ConvolutionTuple, sub: SubspacePair) -> float:
    """max_k |F_k v - proj_{K+L}(F_k v)| / |F_k| over the sum basis."""
    q = sub.sum_basis
    worst = 0.0
    for f in tup.matrices:
        img = f @ q
        resid = img - q @ (q.conj().T @ img)
        worst = max(worst, np.linalg.norm(resid) / max(np.linalg.norm(f), 1e-300))
    return worst


def quotient_matrices(tup: ConvolutionTuple, sub: SubspacePair, complement=None) -> tuple:
    """Matrices of the F_k action on C^n / (K + L), in complement coordinates.

    With the default orthonormal complement C this is C^H F_k C. For an
    arbitrary complement R the quotient class of F_k R is resolved along
    K + L by solving against [R | basis(K + L)].
    """
    if complement is None:
        c = sub.complement_basis
        return tuple(c.conj().T @ f @ c for f in tup.matrices)
    r = np.asarray(complement, dtype=np.complex128)
    basis = np.hstack([r, sub.sum_basis])
    d = r.shape[1]
    return tuple(np.linalg.solve(basis, f @ r)[:d] for f in tup.matrices)


def middle_convolution(sys: PartialFractionSystem, q_lambda, tol: float = 1e-9, complement=None) -> PartialFractionSystem:
    """The reduced system of size (N+1)m - dim(K + L) on the original poles."""
    tup = q_convolution(sys, q_lambda)
    sub = compute_subspaces(sys, tup, tol)
    mats = quotient_matrices(tup, sub, complement)
    return PartialFractionSystem(mats[0], sys.poles, mats[1:])


def branch_q_lambda(p: QPVIParams, branch: str) -> complex:
    chi = {"chi2": p.chi2, "chi1": p.chi1}[_branch(branch)]
    return chi * p.t * p.a1 * p.a2 / p.theta1


def _branch(branch: str) -> str:
    if branch not in BRANCHES:
        raise InvalidInputError(f"branch must be one of {BRANCHES}, got {branch!r}")
    return branch


def js_convolution(p: QPVIParams, branch: str = "chi2") -> ConvolutionTuple:
    return q_convolution(build_B(p), branch_q_lambda(p, branch))


def closed_form_P(p: QPVIParams, branch: str = "chi2") -> np.ndarray:
    """Basis change whose last four columns span K + L."""
    q, t, y, z = p.q, p.t, p.y, p.z
    chi1, chi2, a1, a2, a3, a4 = p.chi1, p.chi2, p.a1, p.a2, p.a3, p.a4
    th1 = p.theta1
    v0, v1, v2 = kernel_vectors(p)
    mat = np.zeros((6, 6), dtype=np.complex128)
    mat[0:2, 3] = v0
    mat[2:4, 4] = v1
    mat[4:6, 5] = v2
    if _branch(branch) == "chi2":
        g1 = q * z * th1 + y * a2 - q * y * z * chi1 * a2 - t * a1 * a2
        g2 = y * (q * z * chi1 - 1) * (a1 - a2)
        g3 = -a2 * (y - t * a1)
        g4 = y * (a1 - a2)
        mat[[1, 3, 5], 2] = 1
    else:
        prod = chi1 * chi2 * a1 * a2 * a3 * a4
        g3 = -q * (chi1 * a2 * y - th1) * z + a2 * (y - t * a1)
        g4 = y * (a1 - a2) * (q * chi1 * z - 1)
        g1 = -chi2 * a2 * (
            q**2 * chi1 * th1 * (y - a3) * (y - a4) * (chi1 * y - chi2 * t * a1) * z**2
            + th1 * (y - t * a1)**2 * (y - t * a2)
            - q * (y - t * a1) * (2 * th1 * chi1 * y**2
                                  - th1 * (chi2 * t * a1 + chi1 * t * a2 + chi1 * a3 + chi1 * a4) * y
                                  + t * (th1**2 + prod)) * z)
        g2 = (a1 - a2) * y * (
            q**2 * chi1**2 * chi2 * th1 * (y - a3) * (y - a4) * z**2
            + th1 * chi2 * (y - t * a1) * (y - t * a2)
            - q * chi1 * (2 * chi2 * th1 * y**2 - chi2 * th1 * (t * a1 + t * a2 + a3 + a4) * y
                          + t * (th1**2 + chi2**2 * a1 * a2 * a3 * a4)) * z)
        mat[[0, 2, 4], 2] = 1
    mat[1, 0], mat[3, 0] = g1, g2
    mat[1, 1], mat[3, 1] = g3, g4
    det = np.linalg.det(mat)
    scale = np.prod(np.linalg.norm(mat, axis=0))
    if abs(det) <= ZETA * scale:
        raise DegenerateParameterError(f"P is singular (|det P| = {abs(det):.3e})")
    return mat


def det_P_formula(p: QPVIParams, branch: str = "chi2") -> complex:
    """Closed-form determinant of P."""
    q, w, y, z, th1 = p.q, p.w, p.y, p.z, p.theta1
    chi1, chi2, a1, a2, t = p.chi1, p.chi2, p.a1, p.a2, p.t
    if _branch(branch) == "chi2":
        return -q**4 * w**3 * y**4 * z**4 * th1**3 * chi2**2 * (chi1 - chi2)**3 * (a1 - a2) * (chi1 * t * a1 * a2 - th1)
    v22 = kernel_vectors(p)[2][1]
    return (q**3 * w**2 * y**3 * z**3 * chi2 * (chi1 - chi2)**2 * (a1 - a2) * th1**2
            * (chi2 * t * a1 * a2 - th1) * v22**2)


def _fbar1_chi2(p: QPVIParams) -> np.ndarray:
    q, t, y, z = p.q, p.t, p.y, p.z
    chi1, chi2, a1, a2, a3, a4 = p.chi1, p.chi2, p.a1, p.a2, p.a3, p.a4
    th1, th2 = p.theta1, p.theta2
    f1 = (q**2 * chi1**2 * chi2 * (y - a3) * (y - a4) * z**2 + (y - t * a2) * (y * chi2 - chi1 * t * a1)
          - q * chi1 * (2 * chi2 * y**2 - (chi1 * t * a1 + chi2 * t * a2 + chi2 * a3 + chi2 * a4) * y
                        + t * (th1 + th2)) * z)
    f2 = q * chi1 * chi2 * a2 * (y - a3) * (y - a4) * z - (y - t * a2) * (a2 * chi2 * y - th1)
    f3 = q * (y * a2 * chi1 - th1) * z - a2 * (y - t * a1)
    pref = a1 / (q * y * z * th1 * (a1 - a2) * (th1 - chi1 * t * a1 * a2))
    return pref * np.array([[-(y - t * a1) * f1 * a2**2, -f2 * (y - t * a1) * a2],
                            [f1 * f3 * a2, f2 * f3]])


def _fbar1_chi1(p: QPVIParams) -> np.ndarray:
    q, t, y, z = p.q, p.t, p.y, p.z
    chi1, chi2, a1, a2, a3, a4 = p.chi1, p.chi2, p.a1, p.a2, p.a3, p.a4
    th1 = p.theta1
    f1 = q * chi1 * chi2 * a2 * (y - a3) * (y - a4) * z - (chi2 * a2 * y - th1) * (y - t * a2)
    f2 = q * (chi1 * a2 * y - th1) * z - a2 * (y - t * a1)
    f3 = (q**2 * chi1 * th1 * (y - a3) * (y - a4) * (chi1 * y - chi2 * t * a1) * z**2
          + th1 * (y - t * a1)**2 * (y - t * a2)
          - q * (y - t * a1) * (2 * chi1 * th1 * y**2
                                - th1 * (chi2 * t * a1 + chi1 * t * a2 + chi1 * a3 + chi1 * a4) * y
                                + t * (th1**2 + chi1 * chi2 * a1 * a2 * a3 * a4)) * z)
    pref = a1 / (q * y * z * th1**2 * (a1 - a2) * (chi2 * t * a1 * a2 - th1))
    return pref * np.array([[-th1 * f1 * f2, -a2 * f2],
                            [chi2 * a2 * th1 * f1 * f3, chi2 * a2**2 * f3]])


def closed_form_mc(p: QPVIParams, branch: str = "chi2") -> PartialFractionSystem:
    """The 2x2 reduced system (F_inf bar; F_1 bar, F_2 bar) in closed form."""
    ta12 = p.t * p.a1 * p.a2
    if _branch(branch) == "chi2":
        fbar1 = _fbar1_chi2
        f_inf = np.diag([p.chi1 * ta12 / p.theta1, 1.0]).astype(np.complex128)
        bad = p.theta1 - p.chi1 * ta12
    else:
        fbar1 = _fbar1_chi1
        f_inf = np.diag([1.0, p.chi2 * ta12 / p.theta1]).astype(np.complex128)
        bad = p.chi2 * ta12 - p.theta1
    if abs(bad) <= ZETA * abs(p.theta1) or p.y == 0 or p.z == 0:
        raise DegenerateParameterError("closed-form middle convolution is singular at these parameters")
    return PartialFractionSystem(f_inf, (p.t * p.a1, p.t * p.a2), (fbar1(p), fbar1(p.swap_a12())))


def conjugated_blocks(p: QPVIParams, branch: str = "chi2"):
    """P^{-1} F_k P for k = inf, 1, 2."""
    pm = closed_form_P(p, branch)
    tup = js_convolution(p, branch)
    return tuple(np.linalg.solve(pm, f @ pm) for f in tup.matrices)


def transformed_A(p: QPVIParams, branch: str = "chi2", c_tilde=None, d_tilde=None) -> MatrixPolynomial:
    """A~(x~) = c~ (x - t a1)(x - t a2) F_bar(x) with x = d~ x~, as a polynomial in x~.

    On the chi1 branch the prefactor carries an extra theta1 / (t a1 a2).
    """
    c_tilde = p.chi2 if c_tilde is None else c_tilde
    d_tilde = 1.0 if (d_tilde is None or branch == "chi2") else d_tilde
    sys = closed_form_mc(p, branch)
    if branch == "chi1":
        # normalisation under which the chi1 parameter map holds as stated
        c_tilde = c_tilde * p.theta1 / (p.t * p.a1 * p.a2)
    b1, b2 = sys.poles
    f_inf, (f1, f2) = sys.b_inf, sys.residues
    c2 = f_inf
    c1 = -(b1 + b2) * f_inf - b1 * f1 - b2 * f2
    c0 = b1 * b2 * (f_inf + f1 + f2)
    return MatrixPolynomial(tuple(c_tilde * c * d_tilde**k for k, c in enumerate((c0, c1, c2))))


def gauge_w_after(p: QPVIParams, branch: str = "chi2", c_tilde=None, d_tilde=None) -> complex:
    """The gauge parameter w of the transformed system, read off A~_1."""
    new = parameter_map_mc(p, p.chi2 if c_tilde is None else c_tilde, branch, d_tilde)
    return complex(transformed_A(p, branch, c_tilde, d_tilde).coefficients[1][0, 1] / new.chi2)


def parameter_map_mc(p: QPVIParams, c_tilde, branch: str = "chi2", d_tilde=None) -> QPVIParams:
    """Parameters of the middle-convolved system in standard form (w := 1).

    Eigenvalue sets are ordered so that theta~1 / (t a~1 a~2) continues
    the theta1 slot of the JS <-> KNY dictionary.
    """
    q, t, y, z = p.q, p.t, p.y, p.z
    chi1, chi2, a1, a2, a3, a4 = p.chi1, p.chi2, p.a1, p.a2, p.a3, p.a4
    th1, th2 = p.theta1, p.theta2
    ta12 = t * a1 * a2
    c = complex(c_tilde)
    if c == 0:
        raise InvalidInputError("c_tilde must be nonzero")
    if _branch(branch) == "chi2":
        na3 = chi2 * ta12 * a3 / th1
        na4 = chi2 * ta12 * a4 / th1
        ra = (y - a3) * (y - a4)
        rt = (y - t * a1) * (y - t * a2)
        num = chi2 * ta12 * (q * chi1 * ra * z - rt)
        den = q * chi1 * chi2 * ta12 * ra * z - th1 * rt
        try:
            ny = safe_div(num, den, scale=abs(num) + abs(th1 * rt), what="y~ denominator") * y
            nz = safe_div(z * chi2 * ra * (ny - t * a1) * (ny - t * a2),
                          c * rt * (ny - na3) * (ny - na4), what="z~ denominator")
        except ArithmeticError as exc:
            raise MapSingularityError(str(exc)) from exc
        return QPVIParams(q=q, t=t, a1=a1, a2=a2, a3=na3, a4=na4,
                          chi1=c * chi1 * ta12 / th1, chi2=c,
                          theta1=c * ta12 * th2 / th1, theta2=c * chi2 * t**2 * a1**2 * a2**2 / th1,
                          y=ny, z=nz, w=1.0)
    if d_tilde is None or d_tilde == 0:
        raise InvalidInputError("branch chi1 requires a nonzero d_tilde")
    d = complex(d_tilde)
    try:
        ny = safe_div(ta12 * (q * chi1 * z - 1), d * (q * th1 * z - ta12),
                      scale=abs(ta12 * (q * chi1 * z - 1)) + abs(d * ta12), what="y~ denominator") * y
    except ArithmeticError as exc:
        raise MapSingularityError(str(exc)) from exc
    return QPVIParams(q=q, t=t, a1=a1 / d, a2=a2 / d,
                      a3=chi1 * ta12 * a3 / (d * th1), a4=chi1 * ta12 * a4 / (d * th1),
                      chi1=c * d**2 * th1 / ta12, chi2=c * d**2 * chi2,
                      theta1=c * chi1 * ta12, theta2=c * th2,
                      y=ny, z=z / (c * d**2), w=1.0)


def propA1_gauge(p: QPVIParams):
    """(c~, d~) with d~ = chi1 t a1 a2 / theta1 and c~ d~^2 = 1."""
    d = p.chi1 * p.t * p.a1 * p.a2 / p.theta1
    return 1 / d**2, d


def y_tilde_alt(p: QPVIParams) -> complex:
    """Second displayed form of y~ (chi2 branch), for cross-checking."""
    r = p.q * p.z * (p.y - p.a3) * (p.y - p.a4) / ((p.y - p.t * p.a1) * (p.y - p.t * p.a2))
    return (r - 1 / p.chi1) / (r - p.theta1 / (p.chi1 * p.chi2 * p.t * p.a1 * p.a2)) * p.y
