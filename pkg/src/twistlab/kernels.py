"""Hot numeric loops, each in a numba flavour and a pure-numpy flavour.

The public names at the bottom of the module are bound to one flavour or the
other according to :data:`twistlab._accel.USE_NUMBA`. Both flavours are always
importable (``*_numba`` / ``*_numpy``) so tests and the benchmark can compare
them directly.

Matrices are stored as rows ``(a, b, c, d)`` of a float64 array.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------- expansion


@njit(nogil=True)
def expand_numba(frontier, last, gens, max_norm2):
    """Right-multiply each frontier row by every generator, skipping the inverse of
    the row's last letter (generators ``j`` and ``j + m/2`` are mutually inverse)."""
    n = frontier.shape[0]
    m = gens.shape[0]
    half = m // 2
    out = np.empty((n * m, 4))
    parent = np.empty(n * m, np.int64)
    gen = np.empty(n * m, np.int64)
    k = 0
    for i in range(n):
        a0, b0, c0, d0 = frontier[i, 0], frontier[i, 1], frontier[i, 2], frontier[i, 3]
        back = -1 if last[i] < 0 else (last[i] + half) % m
        for j in range(m):
            if j == back:
                continue
            a = a0 * gens[j, 0] + b0 * gens[j, 2]
            b = a0 * gens[j, 1] + b0 * gens[j, 3]
            c = c0 * gens[j, 0] + d0 * gens[j, 2]
            d = c0 * gens[j, 1] + d0 * gens[j, 3]
            det = a * d - b * c
            r = 1.0 / math.sqrt(det)
            a *= r
            b *= r
            c *= r
            d *= r
            if a * a + b * b + c * c + d * d <= max_norm2:
                out[k, 0] = a
                out[k, 1] = b
                out[k, 2] = c
                out[k, 3] = d
                parent[k] = i
                gen[k] = j
                k += 1
    return out[:k], parent[:k], gen[:k]


def expand_numpy(frontier, last, gens, max_norm2):
    f = frontier[:, None, :]
    g = gens[None, :, :]
    a = f[..., 0] * g[..., 0] + f[..., 1] * g[..., 2]
    b = f[..., 0] * g[..., 1] + f[..., 1] * g[..., 3]
    c = f[..., 2] * g[..., 0] + f[..., 3] * g[..., 2]
    d = f[..., 2] * g[..., 1] + f[..., 3] * g[..., 3]
    r = 1.0 / np.sqrt(a * d - b * c)
    prod = np.stack([a * r, b * r, c * r, d * r], axis=-1).reshape(-1, 4)
    n, m = frontier.shape[0], gens.shape[0]
    parent = np.repeat(np.arange(n, dtype=np.int64), m)
    gen = np.tile(np.arange(m, dtype=np.int64), n)
    half = m // 2
    back = np.where(last < 0, -1, (last + half) % m)
    keep = (np.einsum("ij,ij->i", prod, prod) <= max_norm2) & (gen != np.repeat(back, m))
    return prod[keep], parent[keep], gen[keep]


# --------------------------------------------------------------------- keys


@njit(nogil=True)
def matrix_keys_numba(mats, grid):
    n = mats.shape[0]
    keys = np.empty((n, 4), np.int64)
    for i in range(n):
        sign = 0
        for j in range(4):
            keys[i, j] = np.int64(round(mats[i, j] / grid))
            if sign == 0 and keys[i, j] != 0:
                sign = 1 if keys[i, j] > 0 else -1
        if sign < 0:
            for j in range(4):
                keys[i, j] = -keys[i, j]
    return keys


def matrix_keys_numpy(mats, grid):
    keys = np.rint(mats / grid).astype(np.int64)
    nz = keys != 0
    first = np.argmax(nz, axis=1)
    lead = keys[np.arange(len(keys)), first]
    sign = np.where(lead < 0, -1, 1).astype(np.int64)
    return keys * sign[:, None]


# ----------------------------------------------------------------- hash set


@njit(nogil=True)
def _mix(k0, k1, k2, k3):
    h = np.uint64(0x9E3779B97F4A7C15)
    for v in (k0, k1, k2, k3):
        x = np.uint64(v) + h
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        h = x ^ (x >> np.uint64(31))
    return h


@njit(nogil=True)
def hash_insert_numba(table, used, keys):
    """Insert rows of ``keys`` into an open-addressing table; flag new rows."""
    size = table.shape[0]
    mask = np.uint64(size - 1)
    is_new = np.zeros(keys.shape[0], np.bool_)
    added = 0
    for i in range(keys.shape[0]):
        k0, k1, k2, k3 = keys[i, 0], keys[i, 1], keys[i, 2], keys[i, 3]
        slot = np.int64(_mix(k0, k1, k2, k3) & mask)
        found = False
        while used[slot]:
            if (table[slot, 0] == k0 and table[slot, 1] == k1
                    and table[slot, 2] == k2 and table[slot, 3] == k3):
                found = True
                break
            slot = (slot + 1) & (size - 1)
        if not found:
            used[slot] = True
            table[slot, 0] = k0
            table[slot, 1] = k1
            table[slot, 2] = k2
            table[slot, 3] = k3
            is_new[i] = True
            added += 1
    return is_new, added


class KeySetNumba:
    def __init__(self, capacity=1 << 12):
        size = 1
        while size < 2 * capacity:
            size <<= 1
        self._table = np.zeros((size, 4), np.int64)
        self._used = np.zeros(size, np.bool_)
        self._count = 0

    def __len__(self):
        return self._count

    def _grow(self, need):
        size = self._table.shape[0]
        if 2 * need <= size:
            return
        while 2 * need > size:
            size <<= 1
        old = self._table[self._used]
        self._table = np.zeros((size, 4), np.int64)
        self._used = np.zeros(size, np.bool_)
        hash_insert_numba(self._table, self._used, old)

    def add_new(self, keys):
        self._grow(self._count + len(keys))
        is_new, added = hash_insert_numba(self._table, self._used, np.ascontiguousarray(keys))
        self._count += added
        return is_new


class KeySetNumpy:
    def __init__(self, capacity=0):
        self._seen = set()

    def __len__(self):
        return len(self._seen)

    def add_new(self, keys):
        seen = self._seen
        is_new = np.zeros(len(keys), bool)
        for i, row in enumerate(map(tuple, keys.tolist())):
            if row not in seen:
                seen.add(row)
                is_new[i] = True
        return is_new


# -------------------------------------------------------------- conjugation


@njit(nogil=True)
def conjugate_numba(hs, g):
    """Rows of ``h g h^-1`` for each row ``h`` of ``hs`` (unit determinant)."""
    n = hs.shape[0]
    out = np.empty((n, 4))
    ga, gb, gc, gd = g[0], g[1], g[2], g[3]
    for i in range(n):
        a, b, c, d = hs[i, 0], hs[i, 1], hs[i, 2], hs[i, 3]
        # h g
        p = a * ga + b * gc
        q = a * gb + b * gd
        r = c * ga + d * gc
        s = c * gb + d * gd
        # (h g) h^-1 with h^-1 = (d, -b, -c, a)
        out[i, 0] = p * d - q * c
        out[i, 1] = -p * b + q * a
        out[i, 2] = r * d - s * c
        out[i, 3] = -r * b + s * a
    return out


def conjugate_numpy(hs, g):
    a, b, c, d = hs[:, 0], hs[:, 1], hs[:, 2], hs[:, 3]
    p = a * g[0] + b * g[2]
    q = a * g[1] + b * g[3]
    r = c * g[0] + d * g[2]
    s = c * g[1] + d * g[3]
    return np.stack([p * d - q * c, -p * b + q * a, r * d - s * c, -r * b + s * a], axis=1)


# -------------------------------------------------------------- series sums


@njit(nogil=True)
def compensated_sum_numba(values):
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def compensated_sum_numpy(values):
    return math.fsum(np.asarray(values, dtype=float).tolist())


@njit(nogil=True)
def twisted_terms_numba(ell, ell_prim, theta, s_re, s_im):
    """Real and imaginary parts of ``ell_prim * amp * exp(-s * rho)`` per class."""
    n = ell.shape[0]
    re = np.empty(n)
    im = np.empty(n)
    half = 0.5 * theta
    ch = math.cos(half)
    sh2 = math.sin(half) ** 2
    t2 = math.tan(half) ** 2
    for i in range(n):
        if theta == 0.0:
            rho = ell[i]
            amp = 1.0
        else:
            x = math.sinh(0.5 * ell[i])
            rho = 2.0 * math.asinh(math.sqrt(x * x + sh2) / ch)
            th = math.tanh(0.5 * ell[i])
            amp = ch * math.sqrt(1.0 + t2 / (th * th))
        mag = ell_prim[i] * amp * math.exp(-s_re * rho)
        re[i] = mag * math.cos(s_im * rho)
        im[i] = -mag * math.sin(s_im * rho)
    return re, im


def twisted_terms_numpy(ell, ell_prim, theta, s_re, s_im):
    if theta == 0.0:
        rho = ell
        amp = np.ones_like(ell)
    else:
        half = 0.5 * theta
        ch = math.cos(half)
        x = np.sinh(0.5 * ell)
        rho = 2.0 * np.arcsinh(np.sqrt(x * x + math.sin(half) ** 2) / ch)
        amp = ch * np.sqrt(1.0 + math.tan(half) ** 2 / np.tanh(0.5 * ell) ** 2)
    mag = ell_prim * amp * np.exp(-s_re * rho)
    return mag * np.cos(s_im * rho), -mag * np.sin(s_im * rho)


if USE_NUMBA:
    expand = expand_numba
    matrix_keys = matrix_keys_numba
    KeySet = KeySetNumba
    conjugate = conjugate_numba
    compensated_sum = compensated_sum_numba
    twisted_terms = twisted_terms_numba
else:
    expand = expand_numpy
    matrix_keys = matrix_keys_numpy
    KeySet = KeySetNumpy
    conjugate = conjugate_numpy
    compensated_sum = compensated_sum_numpy
    twisted_terms = twisted_terms_numpy
