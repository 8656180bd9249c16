"""Hot numeric kernels with two interchangeable implementations.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy
fallback. The environment variable FINSPECT_NUMBA picks the path:

* ``"1"``  force numba (import error if numba is unavailable)
* ``"0"``  force the numpy fallbacks
* unset    prefer numba when it imports, else fall back silently

Both variants of a kernel must return identical results up to floating
point rounding; tests and benchmarks/bench_kernels.py compare them.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("FINSPECT_NUMBA", "").strip()

if _FLAG == "0":
    HAS_NUMBA = False
else:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:
        if _FLAG == "1":
            raise
        HAS_NUMBA = False


# ── median filter ────────────────────────────────────────────────────────

def median_filter_np(padded: np.ndarray, side: int) -> np.ndarray:
    """Median over side x side windows of an already padded image."""
    windows = np.lib.stride_tricks.sliding_window_view(padded, (side, side))
    return np.median(windows, axis=(2, 3))


def _median_filter_loop(padded, side):  # pragma: no cover - compiled twin below
    h = padded.shape[0] - side + 1
    w = padded.shape[1] - side + 1
    out = np.empty((h, w), dtype=np.float64)
    buf = np.empty(side * side, dtype=np.float64)
    mid = (side * side) // 2
    for y in range(h):
        for x in range(w):
            idx = 0
            for dy in range(side):
                for dx in range(side):
                    # insertion sort; windows are tiny and this avoids
                    # per-window allocation under the jit
                    val = padded[y + dy, x + dx]
                    j = idx
                    while j > 0 and buf[j - 1] > val:
                        buf[j] = buf[j - 1]
                        j -= 1
                    buf[j] = val
                    idx += 1
            out[y, x] = buf[mid]
    return out


# ── polar bilinear resampling ────────────────────────────────────────────

def polar_resample_np(img: np.ndarray, cx: float, cy: float,
                      radii: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Sample img at centroid-centred polar points; outside pixels read 0."""
    h, w = img.shape
    xs = cx + radii[:, None] * np.cos(thetas)[None, :]
    ys = cy + radii[:, None] * np.sin(thetas)[None, :]
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0
    out = np.zeros(xs.shape, dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            xi = x0 + dx
            yi = y0 + dy
            wgt = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            ok = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            vals = img[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
            out += np.where(ok, wgt * vals, 0.0)
    return out


def _polar_resample_loop(img, cx, cy, radii, thetas):  # pragma: no cover
    h, w = img.shape
    out = np.zeros((radii.size, thetas.size), dtype=np.float64)
    for s in range(radii.size):
        for t in range(thetas.size):
            x = cx + radii[s] * np.cos(thetas[t])
            y = cy + radii[s] * np.sin(thetas[t])
            x0 = int(np.floor(x))
            y0 = int(np.floor(y))
            fx = x - x0
            fy = y - y0
            acc = 0.0
            for dy in range(2):
                for dx in range(2):
                    xi = x0 + dx
                    yi = y0 + dy
                    if 0 <= xi < w and 0 <= yi < h:
                        wx = fx if dx == 1 else 1.0 - fx
                        wy = fy if dy == 1 else 1.0 - fy
                        acc += wx * wy * img[yi, xi]
            out[s, t] = acc
    return out


# ── SVM cyclic row sweep ─────────────────────────────────────────────────
#
# Row subproblem: maximize A z.delta_i - 2 z.r_i - K_ii ||z||^2 over
# {z <= u_i, sum z = 0}. Completing the square reduces it to the Euclidean
# projection of v = (A u_i - 2 r_i) / (2 K_ii) onto that set, solved
# exactly by scanning the sorted breakpoints tau_c = v_c - u_c of the
# piecewise-linear function f(tau) = sum_c min(u_c, v_c - tau).

def _project_row_np(v: np.ndarray, u: np.ndarray) -> np.ndarray:
    tau = v - u
    order = np.argsort(tau)
    tau_sorted = tau[order]
    v_sorted = v[order]
    u_total = u.sum()
    sum_v = 0.0
    sum_u = 0.0
    k = v.size
    for m in range(1, k + 1):
        sum_v += v_sorted[m - 1]
        sum_u += u[order[m - 1]]
        candidate = (sum_v + u_total - sum_u) / m
        upper = tau_sorted[m] if m < k else np.inf
        if tau_sorted[m - 1] <= candidate <= upper:
            return np.minimum(u, v - candidate)
    # numerically the last segment always admits a root; keep a safe exit
    candidate = (sum_v + u_total - sum_u) / k
    return np.minimum(u, v - candidate)


def svm_sweep_np(K: np.ndarray, eta: np.ndarray, U: np.ndarray, A: float) -> float:
    """One cyclic pass of exact per-row ascent. Mutates eta, returns max gain."""
    n = K.shape[0]
    best = 0.0
    for i in range(n):
        kii = K[i, i]
        if kii < 1e-12:
            continue
        r = K[i] @ eta - kii * eta[i]
        v = (A * U[i] - 2.0 * r) / (2.0 * kii)
        new = _project_row_np(v, U[i])
        d_obj = (A * U[i] - 2.0 * r) @ (new - eta[i]) - kii * (new @ new - eta[i] @ eta[i])
        if d_obj > 0.0:
            eta[i] = new
            if d_obj > best:
                best = d_obj
    return best


def _svm_sweep_loop(K, eta, U, A):  # pragma: no cover - compiled twin below
    n = K.shape[0]
    k = eta.shape[1]
    best = 0.0
    for i in range(n):
        kii = K[i, i]
        if kii < 1e-12:
            continue
        r = np.zeros(k)
        for j in range(n):
            if j != i:
                kij = K[i, j]
                for c in range(k):
                    r[c] += kij * eta[j, c]
        v = (A * U[i] - 2.0 * r) / (2.0 * kii)
        u = U[i]
        tau = v - u
        order = np.argsort(tau)
        u_total = u.sum()
        sum_v = 0.0
        sum_u = 0.0
        candidate = 0.0
        for m in range(1, k + 1):
            sum_v += v[order[m - 1]]
            sum_u += u[order[m - 1]]
            candidate = (sum_v + u_total - sum_u) / m
            upper = tau[order[m]] if m < k else np.inf
            if tau[order[m - 1]] <= candidate <= upper:
                break
        new = np.minimum(u, v - candidate)
        d_obj = 0.0
        nsq = 0.0
        osq = 0.0
        for c in range(k):
            d_obj += (A * u[c] - 2.0 * r[c]) * (new[c] - eta[i, c])
            nsq += new[c] * new[c]
            osq += eta[i, c] * eta[i, c]
        d_obj -= kii * (nsq - osq)
        if d_obj > 0.0:
            for c in range(k):
                eta[i, c] = new[c]
            if d_obj > best:
                best = d_obj
    return best


if HAS_NUMBA:
    median_filter_nb = njit(cache=True)(_median_filter_loop)
    polar_resample_nb = njit(cache=True)(_polar_resample_loop)
    svm_sweep_nb = njit(cache=True)(_svm_sweep_loop)
    median_filter_core = median_filter_nb
    polar_resample_core = polar_resample_nb
    svm_sweep_core = svm_sweep_nb
else:
    median_filter_nb = None
    polar_resample_nb = None
    svm_sweep_nb = None
    median_filter_core = median_filter_np
    polar_resample_core = polar_resample_np
    svm_sweep_core = svm_sweep_np
