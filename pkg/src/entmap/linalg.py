"""Small dense complex linear algebra for bipartite density matrices.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Bipartite operators use the composite index ``a * dB + b`` everywhere.
All logarithms in entmap are base 2 (entanglement in ebits).
"""

import numpy as np

from .errors import DimensionMismatchError, NonSquareError, NotHermitianError

#: Base of every logarithm in the package.
LOG_BASE = 2.0
#: Eigenvalue floor applied before taking matrix logarithms.
EPS_LOG = 1e-12
#: Maximum entrywise deviation from Hermiticity accepted by the eigensolvers.
HERMITIAN_TOL = 1e-10
#: Off-diagonal Frobenius norm at which the Jacobi sweeps stop.
JACOBI_TOL = 1e-13


def as_cmatrix(m):
    """Return ``m`` as a 2-D complex128 array."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def hermiticity_defect(m):
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise NonSquareError(f"matrix of shape {m.shape} is not square")
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def _check_hermitian(m, tol=HERMITIAN_TOL):
    m = as_cmatrix(m)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitianError(f"hermiticity defect {defect:.3e} exceeds {tol:.0e}")
    return 0.5 * (m + m.conj().T)


def jacobi_eigh(m, tol=JACOBI_TOL, max_sweeps=100):
    """Cyclic complex Jacobi eigensolver for a Hermitian matrix.

    Each rotation removes the phase of the pivot ``a[p, q]`` and then applies
    the real Jacobi rotation that annihilates it.  Sweeps stop once the
    off-diagonal Frobenius norm drops below ``tol`` (relative to the norm of
    ``m`` when that exceeds one).

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns.
    """
    a = _check_hermitian(m).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))
    off_mask = ~np.eye(n, dtype=bool)

    def off_norm():
        return float(np.linalg.norm(a[off_mask]))

    for _ in range(max_sweeps):
        if off_norm() < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ g
    else:
        if off_norm() >= threshold:
            raise RuntimeError("Jacobi eigensolver did not converge")

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eig(m, method="lapack"):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    ``m`` is symmetrized as ``(m + m^H) / 2`` after checking that its
    Hermiticity defect is within ``HERMITIAN_TOL``.  ``method`` selects the
    LAPACK driver (default, used in the hot loops) or the in-house Jacobi
    solver.
    """
    if method == "jacobi":
        return jacobi_eigh(m)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    h = _check_hermitian(m)
    w, v = np.linalg.eigh(h)
    return w, v


def hermitian_eigvals(m, method="lapack"):
    if method == "jacobi":
        return jacobi_eigh(m)[0]
    return np.linalg.eigvalsh(_check_hermitian(m))


def matrix_func(m, f, floor=None, method="lapack"):
    """Apply a real scalar function to a Hermitian matrix spectrally.

    If ``floor`` is given, eigenvalues are clipped from below to it before
    ``f`` is applied (used for logarithms of near-singular states).
    """
    w, v = hermitian_eig(m, method=method)
    if floor is not None:
        w = np.maximum(w, floor)
    fw = np.asarray(f(w), dtype=float)
    out = (v * fw) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def matrix_sqrt(m):
    return matrix_func(m, lambda w: np.sqrt(np.maximum(w, 0.0)))


def matrix_log2(m, floor=EPS_LOG):
    return matrix_func(m, np.log2, floor=floor)


def kron(a, b):
    return np.kron(as_cmatrix(a), as_cmatrix(b))


def _check_bipartite(rho, dims):
    rho = as_cmatrix(rho)
    da, db = (int(d) for d in dims)
    if da < 1 or db < 1 or rho.shape != (da * db, da * db):
        raise DimensionMismatchError(
            f"matrix of shape {rho.shape} does not match dims ({da}, {db})"
        )
    return rho, da, db


def partial_transpose(rho, dims, side="B"):
    """Transpose the chosen tensor factor of a bipartite operator."""
    rho, da, db = _check_bipartite(rho, dims)
    t = rho.reshape(da, db, da, db)
    if side == "B":
        t = t.transpose(0, 3, 2, 1)
    elif side == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return t.reshape(da * db, da * db)


def partial_trace(rho, dims, keep="A"):
    rho, da, db = _check_bipartite(rho, dims)
    t = rho.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("ibjb->ij", t)
    if keep == "B":
        return np.einsum("aiaj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def trace_norm_hermitian(m):
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(hermitian_eigvals(m))))


def realign(rho, dims):
    """Realignment matrix ``R[(i, j), (k, l)] = rho[(i, k), (j, l)]``.

    ``i, j`` index subsystem A and ``k, l`` subsystem B, so ``R`` has shape
    ``(dA**2, dB**2)``.
    """
    rho, da, db = _check_bipartite(rho, dims)
    return rho.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)


def singular_value_sum(m):
    """Trace norm (sum of singular values) of an arbitrary matrix.

    Uses an SVD rather than square roots of the spectrum of ``m^H m``: the
    latter turns round-off eigenvalues near zero into ~1e-8 errors.
    """
    m = as_cmatrix(m)
    if m.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))
