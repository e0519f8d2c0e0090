"""Compiled inner loops for runs and one-step drift sampling.

Populations live in a ``uint8[mu, n]`` matrix with an ``int64[mu]`` ones
vector.  Fitness enters only through a table indexed by the ones count
(all benchmarks are unitation functions), mapped to dense ranks so that the
minimum-fitness class can be kept in per-rank buckets with O(1) uniform
victim sampling.

For the uniform crossover + standard bit mutation combination, a crossover
batch is sampled through counts: each offspring needs only
B ~ Bin(d, 1/2) ones among the d differing positions and
F1 ~ Bin(ones, p), F0 ~ Bin(zeros, p) flips to know its fitness, and only the
selected winner is materialized as a uniform arrangement of those counts.
This has exactly the distribution of building every offspring bit by bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MUT_STANDARD = 0
MUT_PAIRED = 1
MUT_RADIUS = 2

XO_UNIFORM = 0
XO_BALANCED = 1
XO_BORING = 2

STOP_OPTIMUM = 0
STOP_PLATEAU = 1
STOP_NEVER = 2

BRANCH_ANY = 0
BRANCH_CROSSOVER = 1
BRANCH_MUTATION = 2

_NEG = np.iinfo(np.int64).min


@njit(cache=True, nogil=True, inline="always")
def _randint(rng, m):
    """Uniform integer in [0, m); bias below m / 2**53, far cheaper than rng.integers under numba."""
    r = np.int64(rng.random() * m)
    return r if r < m else m - 1


@njit(cache=True, nogil=True, inline="always")
def _choose_prefix(buf, m, k, rng):
    """Partial Fisher-Yates: afterwards buf[:k] is a uniform k-subset of buf[:m]."""
    for i in range(k):
        j = i + _randint(rng, m - i)
        t = buf[i]
        buf[i] = buf[j]
        buf[j] = t


@njit(cache=True, nogil=True, inline="always")
def _flip_random(child, n, f, rng, perm):
    _choose_prefix(perm, n, f, rng)
    delta = 0
    for i in range(f):
        p = perm[i]
        if child[p]:
            child[p] = 0
            delta -= 1
        else:
            child[p] = 1
            delta += 1
    return delta


@njit(cache=True, nogil=True, inline="always")
def _flip_classes(child, n, f1, f0, rng, obuf, zbuf):
    """Flip a uniform f1-subset of the ones and a uniform f0-subset of the zeros."""
    a = 0
    z = 0
    for i in range(n):
        if child[i]:
            obuf[a] = i
            a += 1
        else:
            zbuf[z] = i
            z += 1
    _choose_prefix(obuf, a, f1, rng)
    _choose_prefix(zbuf, z, f0, rng)
    for i in range(f1):
        child[obuf[i]] = 0
    for i in range(f0):
        child[zbuf[i]] = 1


@njit(cache=True, nogil=True, inline="always")
def _sample_cdf(cdf, rng):
    u = rng.random()
    f = 0
    last = cdf.shape[0] - 1
    while f < last and u >= cdf[f]:
        f += 1
    return f


@njit(cache=True, nogil=True, inline="always")
def _mutate(child, n, ones, mut_kind, mut_cdf, mut_int, rng, perm, obuf, zbuf):
    if mut_kind == MUT_STANDARD:
        f = _sample_cdf(mut_cdf, rng)
        if f == 0:
            return ones
        return ones + _flip_random(child, n, f, rng, perm)
    if mut_kind == MUT_RADIUS:
        return ones + _flip_random(child, n, mut_int, rng, perm)
    ell = mut_int
    if ell > ones or ell > n - ones:
        raise ValueError("paired flip needs ell <= min(ones, zeros)")
    if ell > 0:
        _flip_classes(child, n, ell, ell, rng, obuf, zbuf)
    return ones


@njit(cache=True, nogil=True, inline="always")
def _crossover(child, xa, xb, n, xo_kind, rng, dbuf):
    if xo_kind == XO_BORING:
        src = xa if rng.random() < 0.5 else xb
        ones = 0
        for i in range(n):
            child[i] = src[i]
            ones += src[i]
        return ones
    ones = 0
    d = 0
    for i in range(n):
        if xa[i] == xb[i]:
            child[i] = xa[i]
            ones += xa[i]
        elif xo_kind == XO_UNIFORM:
            if rng.random() < 0.5:
                child[i] = 1
                ones += 1
            else:
                child[i] = 0
        else:
            child[i] = 0
            dbuf[d] = i
            d += 1
    if xo_kind == XO_BALANCED:
        h = d // 2
        _choose_prefix(dbuf, d, h, rng)
        for j in range(h):
            child[dbuf[j]] = 1
        ones += h
    return ones


@njit(cache=True, nogil=True, inline="always")
def _crossover_batch(pop, i1, i2, n, lam, xo_kind, mut_kind, mut_p, mut_cdf, mut_int, fit_of_ones,
                     target, rng, child, tmp, perm, dbuf, obuf, zbuf):
    """Return (ones of the selected offspring, evaluations used, optimum hit)."""
    xa = pop[i1]
    xb = pop[i2]
    best_f = _NEG
    ties = 0
    best_o = 0
    used = 0
    hit = False
    if xo_kind == XO_UNIFORM and mut_kind == MUT_STANDARD:
        agree_ones = 0
        d = 0
        for i in range(n):
            if xa[i] != xb[i]:
                d += 1
            elif xa[i]:
                agree_ones += 1
        keep_b = 0
        keep_f1 = 0
        keep_f0 = 0
        for _ in range(lam):
            b = rng.binomial(d, 0.5) if d > 0 else 0
            c1 = agree_ones + b
            f1 = rng.binomial(c1, mut_p) if c1 > 0 else 0
            f0 = rng.binomial(n - c1, mut_p) if c1 < n else 0
            o = c1 - f1 + f0
            used += 1
            f = fit_of_ones[o]
            keep = False
            if f > best_f:
                best_f = f
                ties = 1
                keep = True
            elif f == best_f:
                ties += 1
                keep = _randint(rng, ties) == 0
            if keep:
                best_o = o
                keep_b = b
                keep_f1 = f1
                keep_f0 = f0
            if o == target:
                hit = True
                break
        # materialize the winner: agreeing bits, keep_b ones among the differing
        # positions, then the recorded flip counts inside each class
        d = 0
        for i in range(n):
            if xa[i] == xb[i]:
                child[i] = xa[i]
            else:
                child[i] = 0
                dbuf[d] = i
                d += 1
        _choose_prefix(dbuf, d, keep_b, rng)
        for j in range(keep_b):
            child[dbuf[j]] = 1
        _flip_classes(child, n, keep_f1, keep_f0, rng, obuf, zbuf)
        return best_o, used, hit
    for _ in range(lam):
        o = _crossover(tmp, xa, xb, n, xo_kind, rng, dbuf)
        o = _mutate(tmp, n, o, mut_kind, mut_cdf, mut_int, rng, perm, obuf, zbuf)
        used += 1
        f = fit_of_ones[o]
        keep = False
        if f > best_f:
            best_f = f
            ties = 1
            keep = True
        elif f == best_f:
            ties += 1
            keep = _randint(rng, ties) == 0
        if keep:
            best_o = o
            child[:] = tmp
        if o == target:
            hit = True
            break
    return best_o, used, hit


@njit(cache=True, nogil=True, inline="always")
def _zero_counts(pop):
    mu, n = pop.shape
    zc = np.zeros(n, dtype=np.int64)
    for j in range(mu):
        for i in range(n):
            if pop[j, i] == 0:
                zc[i] += 1
    return zc


@njit(cache=True, nogil=True, inline="always")
def _diversity(zc, mu):
    s = 0
    for i in range(zc.shape[0]):
        s += 2 * zc[i] * (mu - zc[i])
    return s


@njit(cache=True, nogil=True, inline="always")
def _replace_delta(row, child, n, mu, zc):
    delta = 0
    for i in range(n):
        if row[i] != child[i]:
            m = zc[i]
            if child[i] == 0:
                delta += 2 * (mu - 2 * m - 1)
            else:
                delta += 2 * (2 * m - mu - 1)
    return delta


@njit(cache=True, nogil=True, inline="always")
def _replace(row, child, n, mu, zc):
    delta = 0
    for i in range(n):
        if row[i] != child[i]:
            m = zc[i]
            if child[i] == 0:
                delta += 2 * (mu - 2 * m - 1)
                zc[i] = m + 1
            else:
                delta += 2 * (2 * m - mu - 1)
                zc[i] = m - 1
            row[i] = child[i]
    return delta


@njit(cache=True, nogil=True, inline="always")
def _offspring(pop, ones, n, mu, crossover_branch, lam, xo_kind, mut_kind, mut_p, mut_cdf, mut_int,
               fit_of_ones, target, rng, child, tmp, perm, dbuf, obuf, zbuf):
    if crossover_branch:
        i1 = _randint(rng, mu)
        i2 = _randint(rng, mu)
        return _crossover_batch(pop, i1, i2, n, lam, xo_kind, mut_kind, mut_p, mut_cdf, mut_int,
                                fit_of_ones, target, rng, child, tmp, perm, dbuf, obuf, zbuf)
    i = _randint(rng, mu)
    child[:] = pop[i]
    o = _mutate(child, n, ones[i], mut_kind, mut_cdf, mut_int, rng, perm, obuf, zbuf)
    return o, 1, o == target


@njit(cache=True, nogil=True)
def run_kernel(pop, ones, rank_of_ones, n_ranks, fit_of_ones,
               is_ga, p_c, lam, mut_kind, mut_p, mut_cdf, mut_int, xo_kind,
               target, plateau, stop_mode, budget, max_gens,
               traj_every, traj, burn_in, horizon, threshold, rng):
    """Run a steady-state EA/GA in place on ``pop``.

    Returns (evaluations, generations, mutation generations, crossover
    generations, plateau evaluation or -1, optimum found, final S, best fitness,
    trajectory length, sum of S over the window, window generations with
    S >= threshold).  Sampling the optimum ends the run (and cuts a crossover
    batch short) only under STOP_OPTIMUM.
    """
    mu, n = pop.shape
    zc = _zero_counts(pop)
    s = _diversity(zc, mu)

    bucket = np.empty((n_ranks, mu), dtype=np.int64)
    bsize = np.zeros(n_ranks, dtype=np.int64)
    bpos = np.empty(mu, dtype=np.int64)
    best = _NEG
    found = False
    on_plateau = 0
    for j in range(mu):
        r = rank_of_ones[ones[j]]
        bucket[r, bsize[r]] = j
        bpos[j] = bsize[r]
        bsize[r] += 1
        if fit_of_ones[ones[j]] > best:
            best = fit_of_ones[ones[j]]
        if ones[j] == target:
            found = True
        if ones[j] == plateau:
            on_plateau += 1
    min_rank = 0
    while bsize[min_rank] == 0:
        min_rank += 1

    evals = mu
    plateau_eval = mu if (plateau >= 0 and on_plateau == mu) else -1
    gens = 0
    mut_gens = 0
    xo_gens = 0
    n_traj = 0
    sum_s = 0.0
    above = 0

    child = np.empty(n, dtype=np.uint8)
    tmp = np.empty(n, dtype=np.uint8)
    perm = np.arange(n)
    dbuf = np.empty(n, dtype=np.int64)
    obuf = np.empty(n, dtype=np.int64)
    zbuf = np.empty(n, dtype=np.int64)

    stop_at_optimum = stop_mode == STOP_OPTIMUM
    stop_at_plateau = stop_mode == STOP_PLATEAU
    batch_target = target if stop_at_optimum else -1
    if (found and stop_at_optimum) or (stop_at_plateau and plateau_eval >= 0):
        return (evals, gens, mut_gens, xo_gens, plateau_eval, found, s, best, n_traj, sum_s, above)

    while evals < budget and gens < max_gens:
        xo = is_ga and rng.random() < p_c
        o, used, hit = _offspring(pop, ones, n, mu, xo, lam, xo_kind, mut_kind, mut_p, mut_cdf, mut_int,
                                  fit_of_ones, batch_target, rng, child, tmp, perm, dbuf, obuf, zbuf)
        evals += used
        gens += 1
        if xo:
            xo_gens += 1
        else:
            mut_gens += 1
        r_child = rank_of_ones[o]
        if r_child >= min_rank:
            v = bucket[min_rank, _randint(rng, bsize[min_rank])]
            s += _replace(pop[v], child, n, mu, zc)
            if ones[v] == plateau:
                on_plateau -= 1
            if o == plateau:
                on_plateau += 1
            # move v from the minimum bucket to its new rank
            p = bpos[v]
            last = bucket[min_rank, bsize[min_rank] - 1]
            bucket[min_rank, p] = last
            bpos[last] = p
            bsize[min_rank] -= 1
            bucket[r_child, bsize[r_child]] = v
            bpos[v] = bsize[r_child]
            bsize[r_child] += 1
            ones[v] = o
            while bsize[min_rank] == 0:
                min_rank += 1
            if fit_of_ones[o] > best:
                best = fit_of_ones[o]
            if plateau_eval < 0 and plateau >= 0 and on_plateau == mu:
                plateau_eval = evals
        if traj_every > 0 and gens % traj_every == 0 and n_traj < traj.shape[0]:
            traj[n_traj] = s
            n_traj += 1
        if gens > burn_in and gens <= burn_in + horizon:
            sum_s += s
            if s >= threshold:
                above += 1
        if o == target:
            # the batch winner has maximal fitness, so a batch containing 1^n returns it
            found = True
            if stop_at_optimum:
                break
        if stop_at_plateau and plateau_eval >= 0:
            break
    return (evals, gens, mut_gens, xo_gens, plateau_eval, found, s, best, n_traj, sum_s, above)


@njit(cache=True, nogil=True)
def drift_kernel(pop, ones, rank_of_ones, fit_of_ones, branch, is_ga, p_c, lam,
                 mut_kind, mut_p, mut_cdf, mut_int, xo_kind, n_samples, rng):
    """Sample S(P_{t+1}) for ``n_samples`` independent generations from ``pop``.

    Returns (next S per sample, accepted flag per sample, crossover flag per sample).
    """
    mu, n = pop.shape
    zc = _zero_counts(pop)
    s0 = _diversity(zc, mu)
    min_rank = rank_of_ones[ones[0]]
    for j in range(mu):
        if rank_of_ones[ones[j]] < min_rank:
            min_rank = rank_of_ones[ones[j]]
    worst = np.empty(mu, dtype=np.int64)
    n_worst = 0
    for j in range(mu):
        if rank_of_ones[ones[j]] == min_rank:
            worst[n_worst] = j
            n_worst += 1

    out_s = np.empty(n_samples, dtype=np.int64)
    accepted = np.zeros(n_samples, dtype=np.uint8)
    crossed = np.zeros(n_samples, dtype=np.uint8)
    child = np.empty(n, dtype=np.uint8)
    tmp = np.empty(n, dtype=np.uint8)
    perm = np.arange(n)
    dbuf = np.empty(n, dtype=np.int64)
    obuf = np.empty(n, dtype=np.int64)
    zbuf = np.empty(n, dtype=np.int64)
    for t in range(n_samples):
        if branch == BRANCH_CROSSOVER:
            xo = True
        elif branch == BRANCH_MUTATION:
            xo = False
        else:
            xo = is_ga and rng.random() < p_c
        o, used, hit = _offspring(pop, ones, n, mu, xo, lam, xo_kind, mut_kind, mut_p, mut_cdf, mut_int,
                                  fit_of_ones, -1, rng, child, tmp, perm, dbuf, obuf, zbuf)
        crossed[t] = xo
        if rank_of_ones[o] >= min_rank:
            v = worst[_randint(rng, n_worst)]
            out_s[t] = s0 + _replace_delta(pop[v], child, n, mu, zc)
            accepted[t] = 1
        else:
            out_s[t] = s0
    return out_s, accepted, crossed
