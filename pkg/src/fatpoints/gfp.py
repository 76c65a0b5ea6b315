"""Exact prime-field arithmetic and dense rank computation.

The rank kernel is blocked Gaussian elimination with first-nonzero pivoting
and delayed reduction: matrix entries live as integer-valued float64, panel
updates accumulate raw multiply-subtract results, and values are brought back
to [0, p) only when a column is scanned for pivots, when a pivot row sources
an update, or after the blocked trailing update.  With block size B the raw
values stay below B*p^2 + p, which is kept under 2^53 so every float64
operation is exact.  The trailing update itself is a rank-B matrix product,
so the bulk of the work runs at BLAS speed.

Two implementations of the hot kernel exist: a numba @njit one (default when
numba is importable) and a pure-numpy one.  Selection: the FATPOINTS_BACKEND
environment variable ("numba", "numpy", or "auto").  benchmarks/bench_rank.py
compares the two.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

try:
    import numba
    from numba import prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via FATPOINTS_BACKEND=numpy
    numba = None
    prange = range
    HAVE_NUMBA = False

BACKEND_ENV = "FATPOINTS_BACKEND"

DEFAULT_PRIME = 32003
# Escalation ladder for retry attempts; all > 40 so no derivative
# coefficient of the systems in scope vanishes spuriously.
PRIME_LADDER = (32003, 65537, 104729)

DEFAULT_BLOCK = 256

# float64 holds integers exactly up to 2**53.
_EXACT_LIMIT = float(2**53)


def is_prime(n: int) -> bool:
    """Primality by trial division; adequate for moduli below 2**31."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_ladder_prime(p: int) -> int:
    """First ladder entry above p, or p itself when already at the top."""
    for q in PRIME_LADDER:
        if q > p:
            return q
    return p


@dataclass(frozen=True)
class FieldPrime:
    """A prime modulus for certificate-grade computations (40 < p < 2**31)."""

    p: int

    def __post_init__(self):
        if not 40 < self.p < 2**31:
            raise ValueError(f"prime must satisfy 40 < p < 2**31, got {self.p}")
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def _check(self, *vals: int):
        for v in vals:
            if not 0 <= v < self.p:
                raise ValueError(f"operand {v} outside [0, {self.p})")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, self.p - 2, self.p)


def active_backend() -> str:
    """Resolve the rank-kernel backend from FATPOINTS_BACKEND."""
    choice = os.environ.get(BACKEND_ENV, "auto").strip().lower() or "auto"
    if choice == "auto":
        return "numba" if HAVE_NUMBA else "numpy"
    if choice == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("FATPOINTS_BACKEND=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise ValueError(f"unknown {BACKEND_ENV} value {choice!r}")


def _safe_block(p: int, block: int) -> int:
    """Largest block size keeping block*p*p + p below the float64 exact range."""
    cap = (2**53 - p) // (p * p)
    return min(block, cap)


# ---------------------------------------------------------------------------
# numba kernel (compiled twice: serial for rank, parallel for rank_blocked)
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(numba.int64(numba.int64, numba.int64), cache=True, nogil=True)
    def _modinv64(x, p):
        acc = 1
        base = x % p
        e = p - 2
        while e > 0:
            if e & 1:
                acc = acc * base % p
            base = base * base % p
            e >>= 1
        return acc


def _blocked_rank_impl(a, p, block):  # pragma: no cover - compiled by numba
    m, n = a.shape
    fp = float(p)
    invp = 1.0 / fp
    piv = np.empty(block, np.int64)
    r = 0
    c0 = 0
    while c0 < n and r < m:
        c1 = min(c0 + block, n)
        k = 0
        for j in range(c0, c1):
            # Lazy-reduce column j on the active rows, track first nonzero.
            pr = -1
            for i in range(r + k, m):
                v = a[i, j]
                q = np.floor(v * invp)
                v -= q * fp
                if v < 0.0:
                    v += fp
                elif v >= fp:
                    v -= fp
                a[i, j] = v
                if pr < 0 and v != 0.0:
                    pr = i
            if pr < 0:
                continue
            rr = r + k
            if pr != rr:
                for t in range(n):
                    tmp = a[rr, t]
                    a[rr, t] = a[pr, t]
                    a[pr, t] = tmp
            # Pivot row must be reduced before it sources updates.
            for t in range(j + 1, c1):
                v = a[rr, t]
                q = np.floor(v * invp)
                v -= q * fp
                if v < 0.0:
                    v += fp
                elif v >= fp:
                    v -= fp
                a[rr, t] = v
            inv = float(_modinv64(np.int64(a[rr, j]), p))
            for i in prange(rr + 1, m):
                f = a[i, j] * inv
                q = np.floor(f * invp)
                f -= q * fp
                if f < 0.0:
                    f += fp
                elif f >= fp:
                    f -= fp
                a[i, j] = f
                if f != 0.0:
                    for t in range(j + 1, c1):
                        a[i, t] -= f * a[rr, t]
            piv[k] = j
            k += 1
            if r + k == m:
                break
        if k > 0 and c1 < n:
            # Pivot rows catch up on the trailing columns sequentially.
            for t in range(1, k):
                row = r + t
                for s in range(t):
                    f = a[row, piv[s]]
                    if f != 0.0:
                        src = r + s
                        for c in range(c1, n):
                            a[row, c] -= f * a[src, c]
                for c in range(c1, n):
                    v = a[row, c]
                    q = np.floor(v * invp)
                    v -= q * fp
                    if v < 0.0:
                        v += fp
                    elif v >= fp:
                        v -= fp
                    a[row, c] = v
            # Rank-k trailing update through BLAS, then one reduction pass.
            nb = m - r - k
            if nb > 0:
                trail = n - c1
                u = np.ascontiguousarray(a[r:r + k, c1:n])
                lo = np.empty((nb, k), np.float64)
                for i in range(nb):
                    for s in range(k):
                        lo[i, s] = a[r + k + i, piv[s]]
                tile = 512
                i0 = 0
                while i0 < nb:
                    i1 = min(i0 + tile, nb)
                    prod = np.dot(lo[i0:i1], u)
                    for i in prange(i1 - i0):
                        row = r + k + i0 + i
                        for c in range(trail):
                            v = a[row, c1 + c] - prod[i, c]
                            q = np.floor(v * invp)
                            v -= q * fp
                            if v < 0.0:
                                v += fp
                            elif v >= fp:
                                v -= fp
                            a[row, c1 + c] = v
                    i0 = i1
        r += k
        c0 = c1
    return r


_NUMBA_KERNELS: dict = {}


def _numba_kernel(parallel: bool):
    fn = _NUMBA_KERNELS.get(parallel)
    if fn is None:
        fn = numba.njit(cache=True, nogil=True, parallel=parallel)(_blocked_rank_impl)
        _NUMBA_KERNELS[parallel] = fn
    return fn


# ---------------------------------------------------------------------------
# pure-numpy fallback (same blocked algorithm, vectorized row operations)
# ---------------------------------------------------------------------------

def _reduce_chunk(a: np.ndarray, fp: float):
    """In-place exact reduction of integer-valued float64 data into [0, p)."""
    q = np.floor(a * (1.0 / fp))
    q *= fp
    a -= q
    np.add(a, fp, out=a, where=a < 0.0)
    np.subtract(a, fp, out=a, where=a >= fp)


def _numpy_blocked_rank(a: np.ndarray, p: int, block: int) -> int:
    m, n = a.shape
    fp = float(p)
    r = 0
    c0 = 0
    while c0 < n and r < m:
        c1 = min(c0 + block, n)
        piv: list[int] = []
        for j in range(c0, c1):
            rr = r + len(piv)
            col = a[rr:, j]
            _reduce_chunk(col, fp)
            nz = np.nonzero(col)[0]
            if nz.size == 0:
                continue
            i = rr + int(nz[0])
            if i != rr:
                a[[rr, i]] = a[[i, rr]]
            if j + 1 < c1:
                _reduce_chunk(a[rr, j + 1:c1], fp)
            inv = float(pow(int(a[rr, j]), -1, p))
            below = a[rr + 1:, j]
            if below.size:
                f = below * inv
                _reduce_chunk(f, fp)
                a[rr + 1:, j] = f
                if j + 1 < c1:
                    a[rr + 1:, j + 1:c1] -= f[:, None] * a[rr, j + 1:c1]
            piv.append(j)
            if rr + 1 == m:
                break
        k = len(piv)
        if k and c1 < n:
            cols = np.asarray(piv, dtype=np.int64)
            for t in range(1, k):
                row = r + t
                mults = a[row, cols[:t]]
                if np.any(mults):
                    a[row, c1:] -= mults @ a[r:row, c1:]
                    _reduce_chunk(a[row, c1:], fp)
            nb = m - r - k
            if nb > 0:
                lo = np.ascontiguousarray(a[r + k:, cols])
                if np.any(lo):
                    a[r + k:, c1:] -= lo @ a[r:r + k, c1:]
                    _reduce_chunk(a[r + k:, c1:], fp)
        r += k
        c0 = c1
    return r


# ---------------------------------------------------------------------------
# wide-modulus fallback: plain int64 elimination with per-step reduction
# (used when p is too large for the float64 delayed-reduction bounds)
# ---------------------------------------------------------------------------

def _int64_rank(a: np.ndarray, p: int) -> int:
    m, n = a.shape
    r = 0
    for c in range(n):
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), -1, p)
        below = a[r + 1:, c]
        if below.size:
            f = below * inv % p
            a[r + 1:, c:] = (a[r + 1:, c:] - f[:, None] * a[r, c:]) % p
        r += 1
        if r == m:
            break
    return r


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def _prepare(mat, p: int, overwrite: bool) -> np.ndarray:
    if p >= 2**31:
        raise ValueError(f"modulus must be below 2**31, got {p}")
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    a = np.asarray(mat)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if np.issubdtype(a.dtype, np.floating):
        work = np.array(a, dtype=np.float64, copy=not (overwrite and a.dtype == np.float64 and a.flags.c_contiguous))
        if work.size:
            if not np.isfinite(work).all():
                raise ValueError("matrix entries must be finite")
            if np.abs(work).max() >= _EXACT_LIMIT:
                raise ValueError("float entries exceed the exact integer range of float64")
            if (work != np.floor(work)).any():
                raise ValueError("float entries must be integer-valued")
        _reduce_chunk(work, float(p))
        return work
    work = np.array(a, dtype=np.int64, copy=True)
    np.mod(work, p, out=work)
    return work.astype(np.float64)


def rank(mat, p: int = DEFAULT_PRIME, block: int = DEFAULT_BLOCK, *, overwrite: bool = False) -> int:
    """Exact rank of a matrix over F_p.

    Entries are reduced mod p on entry; any integer dtype (or integer-valued
    float64) is accepted.  With overwrite=True a float64 C-contiguous input
    is consumed in place.
    """
    a = _prepare(mat, p, overwrite)
    m, n = a.shape
    if m == 0 or n == 0:
        return 0
    blk = _safe_block(p, block)
    if blk < 1:
        work = a.astype(np.int64)
        np.mod(work, p, out=work)
        return _int64_rank(work, p)
    if active_backend() == "numba":
        return int(_numba_kernel(False)(a, p, blk))
    return _numpy_blocked_rank(a, p, blk)


def rank_blocked(mat, p: int = DEFAULT_PRIME, threads: int = 1,
                 block: int = DEFAULT_BLOCK, *, overwrite: bool = False) -> int:
    """rank() with row updates spread across numba worker threads.

    Result is identical to rank() for every input; threads only changes the
    schedule.  On the numpy backend the thread count is ignored (BLAS keeps
    its own threading).
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    a = _prepare(mat, p, overwrite)
    m, n = a.shape
    if m == 0 or n == 0:
        return 0
    blk = _safe_block(p, block)
    if blk < 1:
        work = a.astype(np.int64)
        np.mod(work, p, out=work)
        return _int64_rank(work, p)
    if active_backend() == "numba":
        numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))
        return int(_numba_kernel(True)(a, p, blk))
    return _numpy_blocked_rank(a, p, blk)
