"""Dense primal-dual interior-point solver for small cone programs.

Standard form handled internally:

    minimize    c'x
    subject to  A x = b
                G x + s = h,   s in K

with K a product of a nonnegative orthant, second-order cones, and dense
semidefinite blocks (in scaled-vector coordinates).  The method is
infeasible-start path following with Nesterov-Todd scaling and a Mehrotra
predictor-corrector step; the KKT system is assembled densely and solved by
LU factorization, which is appropriate for the tiny instances this package
produces (a few hundred rows at most).

`solve_conic` is the adapter seam: it accepts the solver-agnostic
`ConicProblem` and returns a `ConicSolution`; swapping in an external conic
solver means reimplementing only this function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import NumericalFailure
from .problem import ConicProblem, ConicSolution, Relation, SolveStatus

DEFAULT_TOL = 1e-7
MAX_ITERATIONS = 100

_STEP_DAMPING = 0.99
_MIN_STEP = 1e-13


# ---------------------------------------------------------------------------
# symmetric-matrix vectorization (off-diagonals scaled by sqrt(2) so that
# svec(A) . svec(B) equals <A, B>)

@lru_cache(maxsize=None)
def _tri_indices(k: int):
    rows, cols = np.tril_indices(k)
    scale = np.where(rows == cols, 1.0, math.sqrt(2.0))
    return rows, cols, scale


def svec_dim(k: int) -> int:
    return k * (k + 1) // 2


def svec(M: np.ndarray) -> np.ndarray:
    rows, cols, scale = _tri_indices(M.shape[0])
    return M[rows, cols] * scale


def smat(v: np.ndarray) -> np.ndarray:
    k = int(round((math.sqrt(8 * v.size + 1) - 1) / 2))
    rows, cols, scale = _tri_indices(k)
    M = np.zeros((k, k))
    M[rows, cols] = v / scale
    M[cols, rows] = M[rows, cols]
    return M


# ---------------------------------------------------------------------------
# cone layout

@dataclass(frozen=True)
class ConeDims:
    nonneg: int = 0
    soc: tuple = ()
    psd: tuple = ()

    @property
    def length(self) -> int:
        return (
            self.nonneg
            + sum(self.soc)
            + sum(svec_dim(k) for k in self.psd)
        )

    @property
    def degree(self) -> int:
        return self.nonneg + len(self.soc) + sum(self.psd)

    def blocks(self):
        """Yield (kind, slice, matrix_order) per block, in storage order."""
        at = 0
        if self.nonneg:
            yield "l", slice(0, self.nonneg), self.nonneg
            at = self.nonneg
        for k in self.soc:
            yield "q", slice(at, at + k), k
            at += k
        for k in self.psd:
            d = svec_dim(k)
            yield "s", slice(at, at + d), k
            at += d


def cone_identity(dims: ConeDims) -> np.ndarray:
    e = np.zeros(dims.length)
    for kind, sl, k in dims.blocks():
        if kind == "l":
            e[sl] = 1.0
        elif kind == "q":
            e.flat[sl.start] = 1.0
        else:
            e[sl] = svec(np.eye(k))
    return e


def min_eigenvalue(u: np.ndarray, dims: ConeDims) -> float:
    """Smallest Jordan eigenvalue of u over the product cone."""
    worst = math.inf
    for kind, sl, k in dims.blocks():
        blk = u[sl]
        if kind == "l":
            worst = min(worst, blk.min() if blk.size else math.inf)
        elif kind == "q":
            worst = min(worst, blk[0] - np.linalg.norm(blk[1:]))
        else:
            worst = min(worst, np.linalg.eigvalsh(smat(blk))[0])
    return worst


def _max_step_nonneg(u, d):
    neg = d < 0
    if not neg.any():
        return math.inf
    return float((-u[neg] / d[neg]).min())


def _max_step_soc(u, d):
    # largest alpha with u + alpha d in the cone; the feasible alphas form
    # an interval starting at 0 because the cone is convex
    J = np.ones_like(u)
    J[1:] = -1.0
    a = float(d @ (J * d))
    b = 2.0 * float(u @ (J * d))
    c = float(u @ (J * u))
    lin = math.inf
    if d[0] < 0:
        lin = -u[0] / d[0]
    if abs(a) < 1e-300:
        quad = math.inf if b >= 0 else -c / b
    else:
        disc = b * b - 4 * a * c
        if disc < 0:
            quad = math.inf if a > 0 else 0.0
        else:
            sq = math.sqrt(disc)
            r1, r2 = sorted(((-b - sq) / (2 * a), (-b + sq) / (2 * a)))
            if r2 <= 0:
                quad = math.inf
            elif r1 > 0:
                quad = r1
            else:
                quad = r2
    return min(lin, quad)


def _max_step_psd(u, d):
    U = smat(u)
    D = smat(d)
    try:
        L = np.linalg.cholesky(U)
    except np.linalg.LinAlgError:
        return 0.0
    Linv_D = np.linalg.solve(L, D)
    M = np.linalg.solve(L, Linv_D.T)
    lam_min = np.linalg.eigvalsh(0.5 * (M + M.T))[0]
    if lam_min >= 0:
        return math.inf
    return -1.0 / lam_min


def max_step(u: np.ndarray, d: np.ndarray, dims: ConeDims) -> float:
    """sup{alpha >= 0 : u + alpha d in K} for u strictly interior."""
    worst = math.inf
    for kind, sl, k in dims.blocks():
        if kind == "l":
            if u[sl].size:
                worst = min(worst, _max_step_nonneg(u[sl], d[sl]))
        elif kind == "q":
            worst = min(worst, _max_step_soc(u[sl], d[sl]))
        else:
            worst = min(worst, _max_step_psd(u[sl], d[sl]))
    return worst


# ---------------------------------------------------------------------------
# Jordan algebra per block

def jordan_product(u, v, dims):
    out = np.empty(dims.length)
    for kind, sl, k in dims.blocks():
        ub, vb = u[sl], v[sl]
        if kind == "l":
            out[sl] = ub * vb
        elif kind == "q":
            out.flat[sl.start] = ub @ vb
            out[sl.start + 1 : sl.stop] = ub[0] * vb[1:] + vb[0] * ub[1:]
        else:
            U, V = smat(ub), smat(vb)
            out[sl] = svec(0.5 * (U @ V + V @ U))
    return out


def _arrow_solve(lam, u):
    k = lam.size
    M = np.zeros((k, k))
    M[0, :] = lam
    M[:, 0] = lam
    M[np.arange(1, k), np.arange(1, k)] = lam[0]
    return np.linalg.solve(M, u)


def jordan_solve(lam, u, dims, psd_eigs):
    """q with lam o q = u; lam must be strictly interior.

    For semidefinite blocks lam is diagonal with entries `psd_eigs` (the
    scaled point produced by the Nesterov-Todd factorization), so the
    Sylvester equation has the closed-form solution Q_ij = 2 U_ij /
    (sig_i + sig_j).
    """
    out = np.empty(dims.length)
    psd_at = 0
    for kind, sl, k in dims.blocks():
        if kind == "l":
            out[sl] = u[sl] / lam[sl]
        elif kind == "q":
            out[sl] = _arrow_solve(lam[sl], u[sl])
        else:
            sig = psd_eigs[psd_at]
            psd_at += 1
            U = smat(u[sl])
            out[sl] = svec(2.0 * U / np.add.outer(sig, sig))
    return out


# ---------------------------------------------------------------------------
# Nesterov-Todd scalings

class _NonnegScaling:
    def __init__(self, s, z):
        self.w = np.sqrt(s / z)
        self.lam = np.sqrt(s * z)

    def W(self, u):
        return self.w * u

    def WT(self, u):
        return self.w * u

    def WinvT(self, u):
        return u / self.w

    def WtW(self):
        return np.diag(self.w * self.w)


class _SocScaling:
    def __init__(self, s, z):
        k = s.size
        J = np.ones(k)
        J[1:] = -1.0
        res_s = s @ (J * s)
        res_z = z @ (J * z)
        if res_s <= 0 or res_z <= 0:
            raise np.linalg.LinAlgError("point left the second-order cone")
        aa = math.sqrt(res_s)
        bb = math.sqrt(res_z)
        sb = s / aa
        zb = z / bb
        gamma = math.sqrt((1.0 + sb @ zb) / 2.0)
        u = (sb + J * zb) / (2.0 * gamma)
        # half-angle hyperbolic Householder vector: the reflector built from
        # u maps zb to sb, while the one built from v is its square root,
        # giving W z = W^{-1} s as the scaling requires
        v = u.copy()
        v[0] += 1.0
        v /= math.sqrt(2.0 * (u[0] + 1.0))
        beta = math.sqrt(aa / bb)
        self._Wm = beta * (2.0 * np.outer(v, v) - np.diag(J))
        Jv = J * v
        self._Winv = (2.0 * np.outer(Jv, Jv) - np.diag(J)) / beta
        self.lam = self._Wm @ z

    def W(self, u):
        return self._Wm @ u

    def WT(self, u):
        return self._Wm @ u

    def WinvT(self, u):
        return self._Winv @ u

    def WtW(self):
        return self._Wm @ self._Wm


class _PsdScaling:
    def __init__(self, s, z, k):
        S, Z = smat(s), smat(z)
        Ls = np.linalg.cholesky(S)
        Lz = np.linalg.cholesky(Z)
        U, sig, Vt = np.linalg.svd(Lz.T @ Ls)
        if sig.min() <= 0:
            raise np.linalg.LinAlgError("semidefinite block lost rank")
        self.sig = sig
        inv_sqrt = 1.0 / np.sqrt(sig)
        self._R = Ls @ (Vt.T * inv_sqrt)
        self._RinvT = Lz @ (U * inv_sqrt)
        self.lam = svec(np.diag(sig))
        self.k = k

    def W(self, u):
        R = self._R
        return svec(R.T @ smat(u) @ R)

    def WT(self, u):
        R = self._R
        return svec(R @ smat(u) @ R.T)

    def WinvT(self, u):
        Rt = self._RinvT
        return svec(Rt.T @ smat(u) @ Rt)

    def WtW(self):
        Wm = self._R @ self._R.T
        d = svec_dim(self.k)
        out = np.empty((d, d))
        basis = np.eye(d)
        for j in range(d):
            out[:, j] = svec(Wm @ smat(basis[j]) @ Wm)
        return 0.5 * (out + out.T)


class _Scaling:
    """Block-diagonal NT scaling of the full product cone."""

    def __init__(self, s, z, dims: ConeDims):
        self.dims = dims
        self.blocks = []
        self.lam = np.empty(dims.length)
        self.psd_eigs = []
        for kind, sl, k in dims.blocks():
            if kind == "l":
                blk = _NonnegScaling(s[sl], z[sl])
            elif kind == "q":
                blk = _SocScaling(s[sl], z[sl])
            else:
                blk = _PsdScaling(s[sl], z[sl], k)
                self.psd_eigs.append(blk.sig)
            self.blocks.append((sl, blk))
            self.lam[sl] = blk.lam

    def _apply(self, u, op):
        out = np.empty_like(u)
        for sl, blk in self.blocks:
            out[sl] = getattr(blk, op)(u[sl])
        return out

    def W(self, u):
        return self._apply(u, "W")

    def WT(self, u):
        return self._apply(u, "WT")

    def WinvT(self, u):
        return self._apply(u, "WinvT")

    def WtW(self):
        out = np.zeros((self.dims.length, self.dims.length))
        for sl, blk in self.blocks:
            out[sl, sl] = blk.WtW()
        return out


# ---------------------------------------------------------------------------
# standard-form data and conversion from the IR

@dataclass
class StandardForm:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray
    dims: ConeDims


def _rotation_to_plain(k: int) -> np.ndarray:
    """Orthogonal map sending a rotated-cone member to a plain-cone member."""
    R = np.eye(k)
    r = 1.0 / math.sqrt(2.0)
    R[0, 0] = R[0, 1] = r
    R[1, 0] = r
    R[1, 1] = -r
    return R


def standard_form(prob: ConicProblem) -> StandardForm:
    n = prob.variable_count
    c = -prob.objective

    G_rows, h_vals = [], []
    A_rows, b_vals = [], []
    n_nonneg = 0
    for con in prob.linear_constraints:
        if con.relation is Relation.EQ:
            A_rows.append(con.coefficients)
            b_vals.append(con.bound)
        elif con.relation is Relation.LE:
            G_rows.append(con.coefficients)
            h_vals.append(con.bound)
            n_nonneg += 1
        else:
            G_rows.append(-con.coefficients)
            h_vals.append(-con.bound)
            n_nonneg += 1

    soc_sizes = []
    for con in prob.soc_constraints:
        M, d = con.matrix, con.offset
        if con.rotated:
            R = _rotation_to_plain(con.dim)
            M, d = R @ M, R @ d
        G_rows.extend(-M)
        h_vals.extend(d)
        soc_sizes.append(con.dim)

    psd_sizes = []
    for con in prob.psd_constraints:
        cols = np.stack([svec(F) for F in con.coefficients], axis=1)
        G_rows.extend(-cols)
        h_vals.extend(svec(con.constant))
        psd_sizes.append(con.dim)

    dims = ConeDims(n_nonneg, tuple(soc_sizes), tuple(psd_sizes))
    G = np.array(G_rows, dtype=float).reshape(dims.length, n)
    h = np.array(h_vals, dtype=float)
    A = (
        np.array(A_rows, dtype=float).reshape(len(A_rows), n)
        if A_rows
        else np.zeros((0, n))
    )
    b = np.array(b_vals, dtype=float)
    return StandardForm(c=c, G=G, h=h, A=A, b=b, dims=dims)


# ---------------------------------------------------------------------------
# the interior-point iteration

@dataclass
class _Iterate:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    z: np.ndarray


def _assemble_kkt(sf: StandardForm, WtW: np.ndarray) -> np.ndarray:
    n = sf.c.size
    p = sf.b.size
    m = sf.dims.length
    K = np.zeros((n + p + m, n + p + m))
    K[:n, n : n + p] = sf.A.T
    K[:n, n + p :] = sf.G.T
    K[n : n + p, :n] = sf.A
    K[n + p :, :n] = sf.G
    K[n + p :, n + p :] = -WtW
    return K


def _initial_point(sf: StandardForm) -> _Iterate:
    n, p, m = sf.c.size, sf.b.size, sf.dims.length
    K = _assemble_kkt(sf, np.eye(m))
    try:
        lu_sol = np.linalg.solve(
            K, np.stack([np.r_[np.zeros(n), sf.b, sf.h],
                         np.r_[-sf.c, np.zeros(p), np.zeros(m)]], axis=1)
        )
    except np.linalg.LinAlgError as err:
        raise NumericalFailure(
            f"initialization matrix is singular: {err}"
        ) from err
    x = lu_sol[:n, 0]
    y = lu_sol[n : n + p, 1]
    xd = lu_sol[:n, 1]

    e = cone_identity(sf.dims)
    s = sf.h - sf.G @ x
    ms = min_eigenvalue(s, sf.dims)
    if ms <= 0:
        s = s + (1.0 - ms) * e
    z = sf.G @ xd
    mz = min_eigenvalue(z, sf.dims)
    if mz <= 0:
        z = z + (1.0 - mz) * e
    return _Iterate(x=x, y=y, s=s, z=z)


@dataclass
class _Residuals:
    rx: np.ndarray
    ry: np.ndarray
    rz: np.ndarray
    gap: float
    pres: float
    dres: float
    relgap: float

    @property
    def worst(self):
        return max(self.pres, self.dres, self.relgap)


def _residuals(sf: StandardForm, it: _Iterate) -> _Residuals:
    rx = sf.A.T @ it.y + sf.G.T @ it.z + sf.c
    ry = sf.A @ it.x - sf.b
    rz = sf.G @ it.x + it.s - sf.h
    gap = max(float(it.s @ it.z), 0.0)
    pcost = float(sf.c @ it.x)
    nb = max(1.0, float(np.linalg.norm(sf.b)))
    nh = max(1.0, float(np.linalg.norm(sf.h)))
    nc = max(1.0, float(np.linalg.norm(sf.c)))
    pres = max(np.linalg.norm(ry) / nb, np.linalg.norm(rz) / nh)
    dres = float(np.linalg.norm(rx)) / nc
    relgap = gap / max(1.0, abs(pcost))
    return _Residuals(rx, ry, rz, gap, float(pres), dres, relgap)


def _certify_primal_infeasible(sf, it, tol) -> bool:
    shift = float(sf.h @ it.z + sf.b @ it.y)
    if shift >= 0:
        return False
    dual_dir = sf.A.T @ it.y + sf.G.T @ it.z
    znorm = np.linalg.norm(it.z)
    if znorm == 0:
        return False
    return float(np.linalg.norm(dual_dir)) / (-shift) <= tol


def solve_standard(
    sf: StandardForm, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITERATIONS
):
    """Run the interior-point iteration on standard-form data.

    Returns (x, y, s, z, status, max_residual, iterations, trace).
    """
    dims = sf.dims
    if dims.length == 0:
        raise NumericalFailure("cone has zero length; nothing to solve")
    degree = dims.degree
    e = cone_identity(dims)
    it = _initial_point(sf)
    trace = []
    best = None

    for iteration in range(max_iter + 1):
        res = _residuals(sf, it)
        trace.append(
            {
                "iteration": iteration,
                "pres": res.pres,
                "dres": res.dres,
                "relgap": res.relgap,
                "gap": res.gap,
            }
        )
        if not np.isfinite(res.worst):
            raise NumericalFailure(
                "iterate diverged to non-finite residuals", trace=trace
            )
        if best is None or res.worst < best[0]:
            best = (res.worst, _Iterate(it.x.copy(), it.y.copy(), it.s.copy(), it.z.copy()))
        if res.pres <= tol and res.dres <= tol and res.relgap <= tol:
            return it.x, it.y, it.s, it.z, SolveStatus.OPTIMAL, res.worst, iteration, trace
        if _certify_primal_infeasible(sf, it, tol):
            return (
                it.x, it.y, it.s, it.z,
                SolveStatus.INFEASIBLE, res.worst, iteration, trace,
            )
        if iteration == max_iter:
            break

        mu = res.gap / degree
        if mu <= 0:
            break
        try:
            scaling = _Scaling(it.s, it.z, dims)
        except np.linalg.LinAlgError as err:
            raise NumericalFailure(f"scaling failed: {err}", trace=trace) from err
        K = _assemble_kkt(sf, scaling.WtW())

        lam = scaling.lam
        n, p = sf.c.size, sf.b.size

        def kkt_solve(r1, r2, r3):
            rhs = np.r_[r1, r2, r3]
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError as err:
                raise NumericalFailure(
                    f"KKT system is singular: {err}", trace=trace
                ) from err
            return sol[:n], sol[n : n + p], sol[n + p :]

        # predictor: affine direction; W'(lam \ (lam o lam)) collapses to s
        dx_a, dy_a, dz_a = kkt_solve(-res.rx, -res.ry, -res.rz + it.s)
        ds_a = -res.rz - sf.G @ dx_a

        alpha_aff = min(
            1.0,
            max_step(it.s, ds_a, dims),
            max_step(it.z, dz_a, dims),
        )
        mu_aff = float(
            (it.s + alpha_aff * ds_a) @ (it.z + alpha_aff * dz_a)
        ) / degree
        sigma = min(1.0, max(0.0, (max(mu_aff, 0.0) / mu) ** 3))

        # corrector: centering plus second-order correction
        eta = jordan_product(
            scaling.WinvT(ds_a), scaling.W(dz_a), dims
        )
        d_s = sigma * mu * e - jordan_product(lam, lam, dims) - eta
        rhs3 = -(1.0 - sigma) * res.rz - scaling.WT(
            jordan_solve(lam, d_s, dims, scaling.psd_eigs)
        )
        dx, dy, dz = kkt_solve(
            -(1.0 - sigma) * res.rx, -(1.0 - sigma) * res.ry, rhs3
        )
        ds = -(1.0 - sigma) * res.rz - sf.G @ dx

        alpha = _STEP_DAMPING * min(
            max_step(it.s, ds, dims), max_step(it.z, dz, dims)
        )
        alpha = min(1.0, alpha)
        if alpha < _MIN_STEP:
            break
        it.x += alpha * dx
        it.y += alpha * dy
        it.s += alpha * ds
        it.z += alpha * dz

    worst, stuck = best
    return (
        stuck.x, stuck.y, stuck.s, stuck.z,
        SolveStatus.NUMERICAL_FAILURE, worst, len(trace) - 1, trace,
    )


def solve_conic(
    prob: ConicProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITERATIONS,
) -> ConicSolution:
    """Solve a `ConicProblem` with the built-in interior-point method.

    Raises
    ------
    NumericalFailure
        On hard numerical breakdown (singular systems, loss of cone
        interiority, non-finite iterates); the iteration trace is attached.
        Plain non-convergence is reported through the returned status
        instead.
    """
    sf = standard_form(prob)
    x, _, _, _, status, worst, iterations, _ = solve_standard(
        sf, tol=tol, max_iter=max_iter
    )
    return ConicSolution(
        variables=x,
        objective_value=float(prob.objective @ x),
        status=status,
        max_residual=worst,
        iterations=iterations,
    )
