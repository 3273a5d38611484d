"""
The linearization of the perturbed fourth-order problem about the lump.

Three operators live here:

* ``apply_linearized``       -- the full operator with the small fourth-order
  y-terms, used by the linear solver inside the outer fixed point;
* ``apply_lump_linearization`` -- the exact linearization of the lump's own
  equation (no epsilon y-terms), which annihilates the translation modes;
* ``apply_L``                -- the reduced second-order nonlocal operator
  whose spectrum carries the Morse-index structure: exactly one negative
  eigenvalue with an even eigenfunction of zero x-mean.

Sign convention for ``apply_L``: the operator is written so that its unique
negative eigenvalue is the structural one (L psi = lambda psi with
lambda_1 < 0 < lambda_2 <= ...).  Equivalently it is the negative of the
second-order expression obtained by integrating the fourth-order operator
twice in x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.sparse.linalg import LinearOperator, lobpcg, minres

from .errors import MultipleNegative, NonZeroMean, NotConverged, SymmetryViolation
from .grid import (
    Grid2D,
    RealField2D,
    Symmetry,
    _project_parity,
    antiderivative_x,
    dealias,
    derivative,
    l2_norm,
    product_dealiased,
    symmetrize,
    weighted_sup,
)
from .lump import SQRT2, LumpParams, sample_lump

DELTA_DEFAULT = 0.1


@dataclass(frozen=True)
class LinearizedOperator:
    """Frozen data of the linearization about the lump at a given eps."""

    eps: float
    q: RealField2D
    dq: RealField2D
    coeff_nl: float
    coeff_lump_nl: float
    lambda_coupling: float

    @property
    def c2(self) -> float:
        """Second-order x coefficient 2*sqrt(2) - eps^2."""
        return 2.0 * SQRT2 - self.eps**2


def make_linearized_operator(
    eps: float, grid: Grid2D, params: LumpParams | None = None
) -> LinearizedOperator:
    params = params if params is not None else LumpParams.from_epsilon(eps)
    q = sample_lump(params, grid, 0, 0)
    dq = sample_lump(params, grid, 1, 0)
    coeff_nl = 6.0 * (SQRT2 - eps**2)
    coeff_lump_nl = 6.0 * SQRT2 * params.B ** 2.5
    return LinearizedOperator(
        eps=eps,
        q=q,
        dq=dq,
        coeff_nl=coeff_nl,
        coeff_lump_nl=coeff_lump_nl,
        lambda_coupling=coeff_lump_nl - coeff_nl,
    )


def _constant_symbol(op: LinearizedOperator, grid: Grid2D) -> np.ndarray:
    """xi1^4 + (2 sqrt2 - e^2) xi1^2 + 2 xi2^2 + 2 e^2 xi1^2 xi2^2 + e^4 xi2^4."""
    kx = grid.kx[:, None]
    ky = grid.ky_r[None, :]
    e2 = op.eps**2
    return kx**4 + op.c2 * kx**2 + 2.0 * ky**2 + 2.0 * e2 * kx**2 * ky**2 + e2**2 * ky**4


def _potential_product(op: LinearizedOperator, psi: RealField2D) -> RealField2D:
    """Fully dealiased potential product T[(T dq)(T psi)].

    The outer truncation makes the product symmetric as a bilinear form,
    which keeps MINRES and LOBPCG on exactly self-adjoint operators and makes
    the second-order eigenpair identity transfer exactly to the fourth-order
    operator through x-antidifferentiation.
    """
    return dealias(product_dealiased(op.dq, psi))


def _coupling(op: LinearizedOperator, phi: RealField2D, coeff: float) -> RealField2D:
    """coeff * d/dx ( dq/dx * dphi/dx ), dealiased."""
    dphi = derivative(phi, 1, 0)
    return derivative(_potential_product(op, dphi), 1, 0).scaled(coeff)


def apply_linearized(op: LinearizedOperator, phi: RealField2D) -> RealField2D:
    """Full linearized operator applied to an odd-in-x, even-in-y field."""
    if phi.symmetry is not Symmetry.ODD_X_EVEN_Y:
        raise SymmetryViolation("apply_linearized expects an odd_x_even_y field")
    out = _apply_constant(op, phi)
    return out - _coupling(op, phi, op.coeff_nl)


def _apply_constant(op: LinearizedOperator, phi: RealField2D) -> RealField2D:
    """Constant-coefficient part, diagonal in Fourier space."""
    grid = phi.grid
    hat = sfft.rfft2(phi.values)
    hat *= _constant_symbol(op, grid)
    vals = _project_parity(grid, sfft.irfft2(hat, s=(grid.nx, grid.ny)), phi.symmetry)
    return RealField2D(grid, vals, phi.symmetry)


def apply_lump_linearization(op: LinearizedOperator, phi: RealField2D) -> RealField2D:
    """Linearization of the lump's own fourth-order equation about q.

    Same x-structure as ``apply_linearized`` but with the lump's nonlinear
    coefficient and without the epsilon-weighted y-terms; annihilates the
    translation modes dq/dx and dq/dy.
    """
    grid = phi.grid
    hat = sfft.rfft2(phi.values)
    kx = grid.kx[:, None]
    ky = grid.ky_r[None, :]
    hat *= kx**4 + op.c2 * kx**2 + 2.0 * ky**2
    vals = _project_parity(grid, sfft.irfft2(hat, s=(grid.nx, grid.ny)), phi.symmetry)
    const = RealField2D(grid, vals, phi.symmetry)
    return const - _coupling(op, phi, op.coeff_lump_nl)


def solve_linearized(
    op: LinearizedOperator,
    h1: RealField2D,
    h2: RealField2D,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> RealField2D:
    """Solve the linearized problem with right-hand side dx h1 + dy h2.

    Preconditioned Picard iteration with Anderson mixing (depth 5); the
    preconditioner inverts the constant-coefficient symbol exactly.  The
    preconditioned iteration matrix has a handful of outlying eigenvalues
    (one of them negative, the Morse-index direction), so on stagnation the
    solve falls back to preconditioned MINRES, which is the natural method
    for this symmetric indefinite problem.
    """
    if h1.symmetry is not Symmetry.EVEN_X_EVEN_Y:
        raise SymmetryViolation("h1 must be tagged even_x_even_y")
    if h2.symmetry is not Symmetry.ODD_X_ODD_Y:
        raise SymmetryViolation("h2 must be tagged odd_x_odd_y")
    grid = h1.grid
    rhs = derivative(h1, 1, 0) + derivative(h2, 0, 1)
    rhs = symmetrize(rhs, Symmetry.ODD_X_EVEN_Y)
    rhs_norm = l2_norm(rhs)
    if rhs_norm == 0.0:
        return RealField2D(grid, np.zeros_like(rhs.values), Symmetry.ODD_X_EVEN_Y)

    sym = _constant_symbol(op, grid)
    inv = np.zeros_like(sym)
    nz = sym > 0
    inv[nz] = 1.0 / sym[nz]

    def precond(vals: np.ndarray) -> np.ndarray:
        hat = sfft.rfft2(vals)
        hat *= inv
        return sfft.irfft2(hat, s=(grid.nx, grid.ny))

    def residual_of(phi: RealField2D) -> float:
        res = apply_linearized(op, phi) - rhs
        return l2_norm(res) / rhs_norm

    # Anderson(5) on phi <- A0^-1 (rhs + coupling(phi))
    depth = 5
    phi = RealField2D(grid, precond(rhs.values), Symmetry.NONE)
    phi = symmetrize(phi, Symmetry.ODD_X_EVEN_Y)
    xs: list[np.ndarray] = []
    fs: list[np.ndarray] = []
    best = None
    best_res = math.inf
    for it in range(max_iter):
        gx = precond(rhs.values + _coupling(op, phi, op.coeff_nl).values)
        f = gx - phi.values
        xs.append(phi.values.ravel().copy())
        fs.append(f.ravel().copy())
        if len(xs) > depth + 1:
            xs.pop(0)
            fs.pop(0)
        if len(xs) >= 2:
            dF = np.stack([fs[i + 1] - fs[i] for i in range(len(fs) - 1)], axis=1)
            dX = np.stack([xs[i + 1] - xs[i] for i in range(len(xs) - 1)], axis=1)
            gamma, *_ = np.linalg.lstsq(dF, fs[-1], rcond=None)
            new = xs[-1] + fs[-1] - (dX + dF) @ gamma
        else:
            new = gx.ravel()
        cand = symmetrize(
            RealField2D(grid, new.reshape(grid.nx, grid.ny)), Symmetry.ODD_X_EVEN_Y
        )
        res = residual_of(cand)
        if res < best_res:
            best, best_res = cand, res
        if res <= tol:
            return cand
        if it >= 12 and res > 0.5 * best_res and best_res > 10 * tol:
            break  # stagnating, switch to MINRES
        phi = cand

    # MINRES fallback with the SPD constant-coefficient preconditioner
    ntot = grid.nx * grid.ny

    def matvec(v: np.ndarray) -> np.ndarray:
        f = RealField2D(grid, v.reshape(grid.nx, grid.ny))
        f = symmetrize(f, Symmetry.ODD_X_EVEN_Y)
        out = _apply_constant(op, f) - _coupling(op, f, op.coeff_nl)
        return out.values.ravel()

    A = LinearOperator((ntot, ntot), matvec=matvec, dtype=float)
    M = LinearOperator(
        (ntot, ntot),
        matvec=lambda v: precond(v.reshape(grid.nx, grid.ny)).ravel(),
        dtype=float,
    )
    x0 = best.values.ravel() if best is not None else None
    sol, info = minres(A, rhs.values.ravel(), x0=x0, M=M, rtol=tol * 1e-2, maxiter=40 * max_iter)
    phi = symmetrize(
        RealField2D(grid, sol.reshape(grid.nx, grid.ny)), Symmetry.ODD_X_EVEN_Y
    )
    res = residual_of(phi)
    if res > tol:
        raise NotConverged(
            f"linearized solve: relative residual {res:.3e} > {tol:.1e} "
            f"(minres info={info})"
        )
    return phi


# ---------------------------------------------------------------------------
# the reduced operator and its eigenpairs
# ---------------------------------------------------------------------------


def _x_mean_removed(vals: np.ndarray) -> np.ndarray:
    return vals - vals.mean(axis=0, keepdims=True)


def apply_L(op: LinearizedOperator, psi: RealField2D) -> RealField2D:
    """Reduced operator: -dxx psi + c2 psi + V psi + 2 dx^-2 dyy psi.

    V is the lump potential (lump nonlinear coefficient times dq/dx).  The
    nonlocal term is defined by double zero-mode-free Fourier division, which
    requires zero x-mean on every y-line; the output is returned in the same
    zero-x-mean convention (the discrete antiderivative fixes integration
    constants per y-line, so the operator is only defined modulo x-constants).
    """
    grid = psi.grid
    scale = float(np.max(np.abs(psi.values)))
    if scale > 0:
        worst = float(np.max(np.abs(psi.values.mean(axis=0))))
        if worst > 1e-8 * scale:
            raise NonZeroMean("apply_L requires zero x-mean on every y-line")
    hat = sfft.rfft2(psi.values)
    kx = grid.kx[:, None]
    ky = grid.ky_r[None, :]
    sym = kx**2 + op.c2
    hat_local = hat * sym
    ratio = np.zeros((grid.nx, grid.ky_r.size))
    nzx = grid.kx != 0.0
    ratio[nzx, :] = 2.0 * ky**2 / (grid.kx[nzx, None] ** 2)
    hat_nonlocal = hat * ratio
    out = sfft.irfft2(hat_local + hat_nonlocal, s=(grid.nx, grid.ny))
    out += op.coeff_lump_nl * _potential_product(op, psi).values
    out = _x_mean_removed(out)
    return RealField2D(grid, out, Symmetry.NONE)


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalue and L2-normalized eigenfunction of the reduced operator."""

    eigenvalue: float
    psi: RealField2D


@dataclass(frozen=True)
class EigenResult:
    """Extremal spectral data of the reduced operator.

    ``pairs`` holds the lowest eigenpairs in ascending order; ``phi0`` is the
    ground state (the single negative direction), ``phi1`` its x-antiderivative
    (odd in x, even in y), ``lambda2`` the smallest positive eigenvalue.
    """

    pairs: tuple[EigenPair, ...]
    phi0: RealField2D
    phi1: RealField2D
    lambda1: float
    lambda2: float
    negative_count: int


def eigen_extremes(
    op: LinearizedOperator,
    k: int = 4,
    tol: float = 1e-7,
    max_iter: int = 600,
    seed: int = 7,
) -> EigenResult:
    """Lowest eigenpairs of the reduced operator on the even/even, zero-x-mean
    subspace, by LOBPCG with the constant-coefficient symbol as preconditioner.

    Raises MultipleNegative when more than one negative eigenvalue shows up:
    Morse index one is the structural hypothesis of the whole construction,
    so a second negative direction signals an inadequate grid or an eps out
    of regime.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    grid = op.q.grid
    nx, ny = grid.nx, grid.ny
    ntot = nx * ny
    kx = grid.kx[:, None]
    ky = grid.ky_r[None, :]
    nzx = grid.kx != 0.0
    nonlocal_ratio = np.zeros((nx, grid.ky_r.size))
    nonlocal_ratio[nzx, :] = 2.0 * ky**2 / (grid.kx[nzx, None] ** 2)
    local_sym = kx**2 + op.c2
    mask = grid.dealias_mask
    tdq = sfft.irfft2(sfft.rfft2(op.dq.values) * mask, s=(nx, ny))

    refl_x = grid._reflect_x
    refl_y = grid._reflect_y

    def project(vals: np.ndarray) -> np.ndarray:
        vals = 0.5 * (vals + vals[refl_x, :])
        vals = 0.5 * (vals + vals[:, refl_y])
        return vals - vals.mean(axis=0, keepdims=True)

    def matvec_block(X: np.ndarray) -> np.ndarray:
        out = np.empty_like(X)
        for j in range(X.shape[1]):
            v = project(X[:, j].reshape(nx, ny))
            hat = sfft.rfft2(v)
            w = sfft.irfft2(hat * (local_sym + nonlocal_ratio), s=(nx, ny))
            tv = sfft.irfft2(hat * mask, s=(nx, ny))
            prod = sfft.irfft2(sfft.rfft2(tdq * tv) * mask, s=(nx, ny))
            w += op.coeff_lump_nl * prod
            out[:, j] = project(w).ravel()
        return out

    pre_sym = 1.0 / (local_sym + nonlocal_ratio + 1.0)

    def prec_block(X: np.ndarray) -> np.ndarray:
        out = np.empty_like(X)
        for j in range(X.shape[1]):
            v = X[:, j].reshape(nx, ny)
            hat = sfft.rfft2(v)
            out[:, j] = project(sfft.irfft2(hat * pre_sym, s=(nx, ny))).ravel()
        return out

    A = LinearOperator((ntot, ntot), matvec=lambda v: matvec_block(v.reshape(-1, 1)).ravel(),
                       matmat=matvec_block, dtype=float)
    M = LinearOperator((ntot, ntot), matvec=lambda v: prec_block(v.reshape(-1, 1)).ravel(),
                       matmat=prec_block, dtype=float)

    rng = np.random.default_rng(seed)
    block = k + 3
    X = np.empty((ntot, block))
    # seed the ground-state direction with the lump potential well shape
    X[:, 0] = project(-op.dq.values * np.exp(-0.05 * grid.r**2)).ravel()
    for j in range(1, block):
        X[:, j] = project(rng.standard_normal((nx, ny))).ravel()

    vals, vecs = lobpcg(A, X, M=M, tol=tol, maxiter=max_iter, largest=False)
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]

    pairs = []
    for j in range(k):
        v = project(vecs[:, j].reshape(nx, ny))
        f = RealField2D(grid, v)
        nrm = l2_norm(f)
        f = f.scaled(1.0 / nrm)
        pairs.append(EigenPair(eigenvalue=float(vals[j]), psi=f))

    neg = [p for p in pairs if p.eigenvalue < 0.0]
    if len(neg) == 0:
        raise NotConverged("no negative eigenvalue found")
    if len(neg) > 1:
        raise MultipleNegative(
            f"found {len(neg)} negative eigenvalues: "
            + ", ".join(f"{p.eigenvalue:.4e}" for p in neg)
        )
    pos = [p.eigenvalue for p in pairs if p.eigenvalue > 0.0]
    phi0 = symmetrize(pairs[0].psi, Symmetry.EVEN_X_EVEN_Y)
    phi1 = antiderivative_x(phi0)
    return EigenResult(
        pairs=tuple(pairs),
        phi0=phi0,
        phi1=phi1.with_symmetry(Symmetry.ODD_X_EVEN_Y),
        lambda1=pairs[0].eigenvalue,
        lambda2=float(pos[0]) if pos else math.nan,
        negative_count=len(neg),
    )


# ---------------------------------------------------------------------------
# weighted norm suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormSuite:
    """Values of the whole family of weighted norms at one field.

    ``a, b, c`` are the L2-based energy norms; ``star`` the full weighted
    solution norm; ``dstar``/``tstar`` the right-hand-side norms; ``qstar``
    and ``pstar`` the two transport-solution norms.
    """

    delta: float
    a: float
    b: float
    c: float
    star: float
    dstar: float
    tstar: float
    qstar: float
    pstar: float


def _norm_a(f: RealField2D, eps: float) -> float:
    e4 = eps**4
    terms = [
        l2_norm(derivative(f, 4, 0)) ** 2,
        e4 * l2_norm(derivative(f, 2, 2)) ** 2,
        e4**2 * l2_norm(derivative(f, 0, 4)) ** 2,
        l2_norm(derivative(f, 2, 0)) ** 2,
        2.0 * l2_norm(derivative(f, 1, 1)) ** 2,
        l2_norm(derivative(f, 0, 2)) ** 2,
        l2_norm(derivative(f, 1, 0)) ** 2,
        l2_norm(derivative(f, 0, 1)) ** 2,
    ]
    return math.sqrt(sum(terms))


def _norm_b(f: RealField2D) -> float:
    return math.sqrt(l2_norm(f) ** 2 + l2_norm(derivative(f, 1, 0)) ** 2)


def _norm_c(f: RealField2D) -> float:
    return math.sqrt(l2_norm(f) ** 2 + l2_norm(derivative(f, 0, 1)) ** 2)


def star_norm_terms(f: RealField2D, eps: float, delta: float) -> dict[str, float]:
    """Every summand of the weighted solution norm, by name."""
    le = 1.0 / math.log(1.0 / eps) if 0 < eps < 1 else 1.0
    e = eps
    d = delta
    terms: dict[str, float] = {}
    terms["a"] = _norm_a(f, eps)
    terms["f_1md"] = weighted_sup(f, 1.0, d)
    terms["f_1_log"] = le * weighted_sup(f, 1.0, 0.0)
    terms["fx_32md"] = weighted_sup(derivative(f, 1, 0), 1.5, d)
    terms["fx_32"] = e**0.5 * weighted_sup(derivative(f, 1, 0), 1.5, 0.0)
    terms["fxx_32"] = weighted_sup(derivative(f, 2, 0), 1.5, 0.0)
    terms["fxxx_32"] = e**0.5 * weighted_sup(derivative(f, 3, 0), 1.5, 0.0)
    terms["fx4_32"] = e**0.5 * weighted_sup(derivative(f, 4, 0), 1.5, 0.0)
    terms["fy_32md"] = e**0.5 * weighted_sup(derivative(f, 0, 1), 1.5, d)
    terms["fy_32"] = e**1.5 * weighted_sup(derivative(f, 0, 1), 1.5, 0.0)
    terms["fyy_32"] = e**1.5 * weighted_sup(derivative(f, 0, 2), 1.5, 0.0)
    terms["fy3_32"] = e**3.5 * weighted_sup(derivative(f, 0, 3), 1.5, 0.0)
    terms["fy4_32"] = e**5.5 * weighted_sup(derivative(f, 0, 4), 1.5, 0.0)
    terms["fxy_32"] = e**0.5 * weighted_sup(derivative(f, 1, 1), 1.5, 0.0)
    terms["fxxy_32"] = e**0.5 * weighted_sup(derivative(f, 2, 1), 1.5, 0.0)
    terms["fxyy_32"] = e**1.5 * weighted_sup(derivative(f, 1, 2), 1.5, 0.0)
    terms["fxxyy_32"] = e**2.5 * weighted_sup(derivative(f, 2, 2), 1.5, 0.0)
    adx = antiderivative_x(derivative(f, 0, 2))
    terms["ix_fyy"] = e**1.5 * weighted_sup(adx, 1.5, d)
    terms["ix_fy3"] = e**3.5 * weighted_sup(derivative(adx, 0, 1), 1.5, d)
    terms["ix_fy4"] = e**5.5 * weighted_sup(derivative(adx, 0, 2), 1.5, d)
    return terms


# terms dominated by truncation noise at desk eps, excluded from the
# contraction stopping proxy but still reported
STAR_PROXY_EXCLUDED = ("fy4_32", "ix_fy4")


def star_norm(f: RealField2D, eps: float, delta: float = DELTA_DEFAULT) -> float:
    return sum(star_norm_terms(f, eps, delta).values())


def star_norm_proxy(f: RealField2D, eps: float, delta: float = DELTA_DEFAULT) -> float:
    terms = star_norm_terms(f, eps, delta)
    return sum(v for k, v in terms.items() if k not in STAR_PROXY_EXCLUDED)


def _norm_dstar(f: RealField2D, delta: float) -> float:
    return (
        _norm_b(f)
        + weighted_sup(f, 2.5, delta)
        + weighted_sup(derivative(f, 1, 0), 2.5, delta)
        + weighted_sup(derivative(f, 2, 0), 2.5, delta)
    )


def _norm_tstar(f: RealField2D, delta: float) -> float:
    return (
        _norm_c(f)
        + weighted_sup(f, 3.0, delta)
        + weighted_sup(derivative(f, 0, 1), 3.0, delta)
        + weighted_sup(derivative(f, 1, 1), 3.0, delta)
    )


def a_norm(f: RealField2D, eps: float) -> float:
    """Energy norm of the linearized problem (L2, eps-weighted derivatives)."""
    return _norm_a(f, eps)


def b_norm(f: RealField2D) -> float:
    """L2 right-hand-side norm (value and x-derivative)."""
    return _norm_b(f)


def c_norm(f: RealField2D) -> float:
    """L2 right-hand-side norm (value and y-derivative)."""
    return _norm_c(f)


def qstar_norm(f: RealField2D, eps: float, delta: float = DELTA_DEFAULT) -> float:
    """Weighted transport-solution norm (the one the f2 estimates live in)."""
    return _norm_qstar(f, eps, delta)


def _norm_qstar(f: RealField2D, eps: float, delta: float) -> float:
    e = eps
    d = delta
    return (
        weighted_sup(f, 1.5, d)
        + weighted_sup(derivative(f, 1, 0), 1.5, d)
        + weighted_sup(derivative(f, 2, 0), 1.5, d)
        + e * weighted_sup(derivative(f, 3, 0), 1.5, d)
        + e**2 * weighted_sup(derivative(f, 0, 1), 1.5, d)
        + e**2 * weighted_sup(derivative(f, 1, 1), 1.5, d)
        + e**4 * weighted_sup(derivative(f, 0, 2), 1.5, d)
        + e**4 * weighted_sup(derivative(f, 1, 2), 1.5, d)
    )


def _norm_pstar(f: RealField2D, eps: float, delta: float) -> float:
    e = eps
    d = delta
    return (
        weighted_sup(f, 1.5, d)
        + weighted_sup(derivative(f, 1, 0), 1.5, d)
        + e**2 * weighted_sup(derivative(f, 0, 1), 1.5, d)
        + e**4 * weighted_sup(derivative(f, 0, 2), 1.5, d)
    )


def norm_suite(f: RealField2D, eps: float, delta: float = DELTA_DEFAULT) -> NormSuite:
    """Evaluate every norm of the suite on one field.

    Terms that are trivial for the field's symmetry class are still computed
    and reported; nothing is skipped silently.  Raises NonZeroMean if an
    antiderivative term is requested for data without zero x-mean.
    """
    if not (0.0 < delta <= 0.5):
        raise ValueError("delta must lie in (0, 0.5]")
    return NormSuite(
        delta=delta,
        a=_norm_a(f, eps),
        b=_norm_b(f),
        c=_norm_c(f),
        star=star_norm(f, eps, delta),
        dstar=_norm_dstar(f, delta),
        tstar=_norm_tstar(f, delta),
        qstar=_norm_qstar(f, eps, delta),
        pstar=_norm_pstar(f, eps, delta),
    )
