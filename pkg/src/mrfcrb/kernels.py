"""Compiled inner loops: RNG, Gibbs/Swendsen-Wang updates, chain runners,
state enumeration, and the exchange-algorithm chain.

All randomness flows through a splitmix64 stream held in a one-element
uint64 array, so every kernel is deterministic given the seed.
"""

import numpy as np
from numba import njit, uint64

RNG_NAME = "splitmix64-v1"

_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


@njit(cache=True, nogil=True, inline="always")
def next_u64(state):
    state[0] += uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return z ^ (z >> uint64(31))


@njit(cache=True, nogil=True, inline="always")
def rand_u01(state):
    """Uniform double in [0, 1)."""
    return (next_u64(state) >> uint64(11)) * _INV_2_53


@njit(cache=True, nogil=True, inline="always")
def rand_below(state, k):
    """Uniform integer in {0, ..., k-1}."""
    return int(rand_u01(state) * k)


@njit(cache=True, nogil=True, inline="always")
def rand_normal(state):
    u1 = 1.0 - rand_u01(state)  # (0, 1], keeps log finite
    u2 = rand_u01(state)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@njit(cache=True, nogil=True)
def phi_of(labels, edges):
    c = 0
    for e in range(edges.shape[0]):
        if labels[edges[e, 0]] == labels[edges[e, 1]]:
            c += 1
    return c


@njit(cache=True, nogil=True)
def gibbs_sweep(labels, nbr, deg, K, theta, state, random_scan, counts, probs):
    """One Gibbs sweep (n_sites single-site updates); returns the change
    in the edge-agreement count."""
    n = labels.size
    dphi = 0
    for i in range(n):
        site = rand_below(state, n) if random_scan else i
        for k in range(K):
            counts[k] = 0.0
        for j in range(deg[site]):
            counts[labels[nbr[site, j]]] += 1.0
        m = counts[0]
        for k in range(1, K):
            if counts[k] > m:
                m = counts[k]
        tot = 0.0
        for k in range(K):
            p = np.exp(theta * (counts[k] - m))
            probs[k] = p
            tot += p
        u = rand_u01(state) * tot
        acc = 0.0
        new = K - 1
        for k in range(K):
            acc += probs[k]
            if u < acc:
                new = k
                break
        old = labels[site]
        if new != old:
            dphi += int(counts[new]) - int(counts[old])
            labels[site] = new
    return dphi


@njit(cache=True, nogil=True)
def _uf_find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:  # path compression
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True, nogil=True)
def sw_step(labels, edges, K, theta, state, parent, newlab):
    """One Swendsen-Wang step: open bonds on agreeing edges with
    probability 1 - exp(-theta), relabel each cluster uniformly."""
    n = labels.size
    p_open = 1.0 - np.exp(-theta)
    for i in range(n):
        parent[i] = i
    for e in range(edges.shape[0]):
        a = edges[e, 0]
        b = edges[e, 1]
        if labels[a] == labels[b] and rand_u01(state) < p_open:
            ra = _uf_find(parent, a)
            rb = _uf_find(parent, b)
            if ra != rb:
                parent[rb] = ra
    for i in range(n):
        newlab[i] = -1
    for i in range(n):
        r = _uf_find(parent, i)
        if newlab[r] < 0:
            newlab[r] = rand_below(state, K)
        labels[i] = newlab[r]


@njit(cache=True, nogil=True)
def run_gibbs_chain(labels, nbr, deg, edges, K, theta, n_burn, n_mc, state, random_scan):
    """Burn in, then record phi once per sweep. Mutates `labels`."""
    counts = np.zeros(K, np.float64)
    probs = np.empty(K, np.float64)
    phi = phi_of(labels, edges)
    series = np.empty(n_mc, np.int64)
    for t in range(n_burn + n_mc):
        phi += gibbs_sweep(labels, nbr, deg, K, theta, state, random_scan, counts, probs)
        if t >= n_burn:
            series[t - n_burn] = phi
    return series


@njit(cache=True, nogil=True)
def run_sw_chain(labels, edges, K, theta, n_burn, n_mc, state):
    n = labels.size
    parent = np.empty(n, np.int32)
    newlab = np.empty(n, np.int32)
    series = np.empty(n_mc, np.int64)
    for t in range(n_burn + n_mc):
        sw_step(labels, edges, K, theta, state, parent, newlab)
        if t >= n_burn:
            series[t - n_burn] = phi_of(labels, edges)
    return series


@njit(cache=True, nogil=True)
def gibbs_state_histogram(labels, nbr, deg, K, theta, n_samples, thin, state):
    """Counts of encoded states (sum labels[i] * K^i) for tiny lattices."""
    n = labels.size
    counts = np.zeros(K, np.float64)
    probs = np.empty(K, np.float64)
    hist = np.zeros(K**n, np.int64)
    for t in range(n_samples):
        for _ in range(thin):
            gibbs_sweep(labels, nbr, deg, K, theta, state, False, counts, probs)
        code = 0
        for i in range(n - 1, -1, -1):
            code = code * K + labels[i]
        hist[code] += 1
    return hist


@njit(cache=True, nogil=True)
def sw_state_histogram(labels, edges, K, theta, n_samples, thin, state):
    n = labels.size
    parent = np.empty(n, np.int32)
    newlab = np.empty(n, np.int32)
    hist = np.zeros(K**n, np.int64)
    for t in range(n_samples):
        for _ in range(thin):
            sw_step(labels, edges, K, theta, state, parent, newlab)
        code = 0
        for i in range(n - 1, -1, -1):
            code = code * K + labels[i]
        hist[code] += 1
    return hist


@njit(cache=True, nogil=True)
def density_of_states(nbr, deg, n_edges, K, n):
    """Counts of configurations per edge-agreement value, by odometer
    enumeration of all K^n states with incremental updates."""
    labels = np.zeros(n, np.int64)
    dos = np.zeros(n_edges + 1, np.int64)
    phi = n_edges  # all-zero labels: every edge agrees
    dos[phi] += 1
    while True:
        p = 0
        while p < n:
            old = labels[p]
            new = old + 1
            if new == K:
                new = 0
            d = 0
            for j in range(deg[p]):
                nl = labels[nbr[p, j]]
                if nl == new:
                    d += 1
                if nl == old:
                    d -= 1
            labels[p] = new
            phi += d
            if new != 0:
                break
            p += 1
        if p == n:  # odometer rolled over: all states visited
            return dos
        dos[phi] += 1


@njit(cache=True, nogil=True)
def exchange_chain(
    z_obs, nbr, deg, edges, K, theta0, tmin, tmax, prop_sd,
    n_burn, n_samples, aux_sweeps, state,
):
    """Exchange-algorithm chain on theta with uniform prior on
    [tmin, tmax]; auxiliary field simulated from z_obs with `aux_sweeps`
    Gibbs sweeps at the proposed theta. Returns (samples, n_accepted)."""
    counts = np.zeros(K, np.float64)
    probs = np.empty(K, np.float64)
    w = np.empty_like(z_obs)
    phi_obs = phi_of(z_obs, edges)
    theta = theta0
    samples = np.empty(n_samples, np.float64)
    n_acc = 0
    for it in range(n_burn + n_samples):
        tp = theta + prop_sd * rand_normal(state)
        if tmin <= tp <= tmax:
            w[:] = z_obs
            phi_w = phi_obs
            for _ in range(aux_sweeps):
                phi_w += gibbs_sweep(w, nbr, deg, K, tp, state, False, counts, probs)
            log_alpha = (tp - theta) * (phi_obs - phi_w)
            if log_alpha >= 0.0 or rand_u01(state) < np.exp(log_alpha):
                theta = tp
                n_acc += 1
        if it >= n_burn:
            samples[it - n_burn] = theta
    return samples, n_acc
