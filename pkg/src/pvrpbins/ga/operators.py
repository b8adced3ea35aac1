"""Permutation and binary-mask variation operators.

Permutation operators take two sequences holding the same elements and
return two new lists. ``rng`` is a :class:`random.Random`; operators that
accept explicit cut points or positions use them instead of sampling, which
keeps hand-worked traces testable.
"""

from __future__ import annotations


def _two_cuts(n, rng):
    a = rng.randrange(n + 1)
    b = rng.randrange(n + 1)
    if a > b:
        a, b = b, a
    return a, b


def _pmx_child(donor, other, lo, hi):
    child = list(other)
    child[lo:hi] = donor[lo:hi]
    segment = {donor[k]: k for k in range(lo, hi)}
    for k in list(range(lo)) + list(range(hi, len(other))):
        g = other[k]
        while g in segment:
            g = other[segment[g]]
        child[k] = g
    return child


def pmx(a, b, rng, cuts=None):
    """Partially mapped crossover: each child keeps one parent's segment
    ``[lo, hi)`` and takes the rest from the other parent, resolving clashes
    through the segment's position mapping."""
    lo, hi = cuts if cuts is not None else _two_cuts(len(a), rng)
    return _pmx_child(a, b, lo, hi), _pmx_child(b, a, lo, hi)


def _ox_child(donor, other, lo, hi):
    n = len(donor)
    child = [None] * n
    child[lo:hi] = donor[lo:hi]
    kept = set(donor[lo:hi])
    fill = [other[(hi + k) % n] for k in range(n)]
    fill = [g for g in fill if g not in kept]
    pos = hi % n
    for g in fill:
        while child[pos] is not None:
            pos = (pos + 1) % n
        child[pos] = g
    return child


def ox(a, b, rng, cuts=None):
    """Order crossover: copy a slice, then fill the remaining slots starting
    after the slice with the other parent's genes in their cyclic order."""
    lo, hi = cuts if cuts is not None else _two_cuts(len(a), rng)
    if lo == hi:
        return list(a), list(b)
    return _ox_child(a, b, lo, hi), _ox_child(b, a, lo, hi)


def cx(a, b, rng=None):
    """Cycle crossover: cycles alternate between parents, the first cycle
    (through position 0) coming from the child's own parent."""
    n = len(a)
    pos_a = {g: k for k, g in enumerate(a)}
    c1, c2 = [None] * n, [None] * n
    take_own = True
    for start in range(n):
        if c1[start] is not None:
            continue
        k = start
        while c1[k] is None:
            if take_own:
                c1[k], c2[k] = a[k], b[k]
            else:
                c1[k], c2[k] = b[k], a[k]
            k = pos_a[b[k]]
        take_own = not take_own
    return c1, c2


def cx2(a, b, rng=None):
    """Modified cycle crossover (CX2).

    With ``f(x) = b[index of x in a]``, the first child takes ``f(x)`` and
    the second ``f(f(f(x)))`` alternately along each cycle of ``f``, starting
    from the first unused gene of ``a``; the cycle closes once the second child
    receives that starting gene. Cycles whose length is a multiple of three
    would leave the two children with different gene sets, so they are
    copied in single steps instead (``f(x), f^2(x), ...`` and
    ``f^3(x), f^4(x), ...``).
    """
    f = {g: b[k] for k, g in enumerate(a)}
    c1, c2 = [], []
    used = set()
    for start in a:
        if start in used:
            continue
        cycle = [start]
        g = f[start]
        while g != start:
            cycle.append(g)
            g = f[g]
        used.update(cycle)
        if len(cycle) % 3 == 0:
            length = len(cycle)
            c1.extend(cycle[(1 + k) % length] for k in range(length))
            c2.extend(cycle[(3 + k) % length] for k in range(length))
            continue
        x = f[start]
        while True:
            c1.append(x)
            y = f[f[x]]
            c2.append(y)
            if y == start:
                break
            x = f[y]
    return c1, c2


CROSSOVERS = {"PMX": pmx, "OX": ox, "CX": cx, "CX2": cx2}


def crossover_perm(a, b, op, rng):
    return CROSSOVERS[op](a, b, rng)


def exchange(row, i, j):
    out = list(row)
    out[i], out[j] = out[j], out[i]
    return out


def insertion(row, i, j):
    """Remove the gene at ``i`` and reinsert it so it ends up at index ``j``."""
    out = list(row)
    g = out.pop(i)
    out.insert(j, g)
    return out


def inversion(row, i, j):
    """Reverse the inclusive segment ``[min(i, j), max(i, j)]``."""
    if i > j:
        i, j = j, i
    out = list(row)
    out[i:j + 1] = out[i:j + 1][::-1]
    return out


_MUTATIONS = {"EM": exchange, "IM": insertion, "INM": inversion}
MUTATIONS = tuple(_MUTATIONS)


def mutate_perm(row, op, rng):
    n = len(row)
    if n < 2:
        return list(row)
    return _MUTATIONS[op](row, rng.randrange(n), rng.randrange(n))


def crossover_mask(mask_a, mask_b, working, rng, cuts=None):
    """Two-point crossover over the working-day bits, flattened point-major.

    Masks are sequences of per-point rows; rest-day columns are left as they
    are (all False for valid chromosomes).
    """
    days = [t for t, w in enumerate(working) if w]
    n_days = len(days)
    size = len(mask_a) * n_days
    lo, hi = cuts if cuts is not None else _two_cuts(size, rng)
    if lo == hi:
        return [list(r) for r in mask_a], [list(r) for r in mask_b]
    out_a = [list(r) for r in mask_a]
    out_b = [list(r) for r in mask_b]
    for k in range(lo, hi):
        i, d = divmod(k, n_days)
        t = days[d]
        out_a[i][t], out_b[i][t] = mask_b[i][t], mask_a[i][t]
    return out_a, out_b


def mutate_mask(mask, rate, working, rng):
    """Flip every working-day bit independently with probability ``rate``."""
    out = [list(r) for r in mask]
    if rate <= 0.0:
        return out
    days = [t for t, w in enumerate(working) if w]
    rand = rng.random
    for row in out:
        for t in days:
            if rand() < rate:
                row[t] = not row[t]
    return out
