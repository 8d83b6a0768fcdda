"""numba kernels over integer-scaled QUBOs in CSR adjacency form.

``lin[i]`` is the linear coefficient of variable ``i``; the neighbours of
``i`` are ``idx[ptr[i]:ptr[i+1]]`` with couplings ``w`` (each pair listed
from both ends).  All energies are exact int64.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def gray_scan(lin, ptr, idx, w, offset, cap):
    n = lin.shape[0]
    x = np.zeros(n, np.int8)
    field = lin.copy()
    e = offset
    best = e
    count = 1
    states = np.empty(max(cap, 1), np.int64)
    states[0] = 0
    kept = 1
    mask = np.int64(0)
    total = np.int64(1) << n
    for k in range(1, total):
        b = 0
        while not (k >> b) & 1:
            b += 1
        if x[b] == 0:
            e += field[b]
            x[b] = 1
            sgn = 1
        else:
            e -= field[b]
            x[b] = 0
            sgn = -1
        for p in range(ptr[b], ptr[b + 1]):
            field[idx[p]] += sgn * w[p]
        mask ^= np.int64(1) << b
        if e < best:
            best = e
            count = 1
            states[0] = mask
            kept = 1
        elif e == best:
            count += 1
            if kept < cap:
                states[kept] = mask
                kept += 1
    return best, count, states[:kept]


@njit(cache=True)
def _energy(x, lin, ptr, idx, w, offset):
    e = offset
    n = lin.shape[0]
    for i in range(n):
        if x[i]:
            e += lin[i]
            for p in range(ptr[i], ptr[i + 1]):
                j = idx[p]
                if j > i and x[j]:
                    e += w[p]
    return e


@njit(cache=True)
def _fields(x, lin, ptr, idx, w):
    n = lin.shape[0]
    field = lin.copy()
    for i in range(n):
        for p in range(ptr[i], ptr[i + 1]):
            if x[idx[p]]:
                field[i] += w[p]
    return field


@njit(cache=True)
def flip_trajectory(x0, flips, lin, ptr, idx, w, offset):
    """Energies after each flip, tracked by single-bit deltas."""
    x = x0.copy()
    field = _fields(x, lin, ptr, idx, w)
    e = _energy(x, lin, ptr, idx, w, offset)
    out = np.empty(flips.shape[0], np.int64)
    for t in range(flips.shape[0]):
        b = flips[t]
        if x[b] == 0:
            e += field[b]
            x[b] = 1
            sgn = 1
        else:
            e -= field[b]
            x[b] = 0
            sgn = -1
        for p in range(ptr[b], ptr[b + 1]):
            field[idx[p]] += sgn * w[p]
        out[t] = e
    return out


@njit(cache=True)
def anneal(lin, ptr, idx, w, offset, betas, seeds):
    """One Metropolis chain per seed; returns the lowest state seen by each."""
    n = lin.shape[0]
    reads = seeds.shape[0]
    out_x = np.zeros((reads, n), np.int8)
    out_e = np.zeros(reads, np.int64)
    for r in range(reads):
        np.random.seed(seeds[r])
        x = np.zeros(n, np.int8)
        for i in range(n):
            if np.random.random() < 0.5:
                x[i] = 1
        field = _fields(x, lin, ptr, idx, w)
        e = _energy(x, lin, ptr, idx, w, offset)
        best = e
        best_x = x.copy()
        for s in range(betas.shape[0]):
            beta = betas[s]
            for i in range(n):
                d = field[i] if x[i] == 0 else -field[i]
                if d <= 0 or np.random.random() < np.exp(-beta * d):
                    if x[i] == 0:
                        x[i] = 1
                        sgn = 1
                    else:
                        x[i] = 0
                        sgn = -1
                    e += d
                    for p in range(ptr[i], ptr[i + 1]):
                        field[idx[p]] += sgn * w[p]
                    if e < best:
                        best = e
                        best_x[:] = x
        out_x[r] = best_x
        out_e[r] = best
    return out_x, out_e
