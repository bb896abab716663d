"""Shared oracle helpers for the test suite.

These deliberately use brute force or third-party routines so the library
implementations are checked against an independent route.
"""

import itertools

import numpy as np


def brute_force_kmeans(samples: np.ndarray, k: int) -> float:
    """Global minimum of the k-means objective by enumerating every one of the
    k**n assignments. Only viable for tiny n."""
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.shape[0]
    best = np.inf
    for assign in itertools.product(range(k), repeat=n):
        assign = np.asarray(assign)
        total = 0.0
        for j in range(k):
            members = samples[assign == j]
            if members.shape[0] == 0:
                continue
            mean = members.mean(axis=0)
            total += float(np.sum((members - mean) ** 2))
        if total < best:
            best = total
    return best


def naive_region_merge(counts, mean_lab, adjacency, threshold, min_px):
    """Reference merger: recompute every pair similarity from scratch each
    round instead of maintaining a heap.

    counts/mean_lab: dicts keyed by region id; adjacency: dict of sets.
    Each round, merge the globally most similar adjacent pair if its CIELAB
    distance is <= threshold (ties toward the lower id pair, lower id
    survives); otherwise absorb the smallest undersized region that has
    neighbors into its most similar neighbor (which survives). Stop when
    neither move applies.

    Returns (counts, mean_lab, resolve) where resolve maps every original id
    to the id of the region that finally contains it.
    """
    counts = dict(counts)
    mean_lab = {r: np.asarray(v, dtype=np.float64) for r, v in mean_lab.items()}
    adjacency = {r: set(v) for r, v in adjacency.items()}
    merged_into = {}

    def distance(a, b):
        return float(np.sqrt(np.sum((mean_lab[a] - mean_lab[b]) ** 2)))

    def merge(survivor, absorbed):
        total = counts[survivor] + counts[absorbed]
        mean_lab[survivor] = (
            counts[survivor] * mean_lab[survivor]
            + counts[absorbed] * mean_lab[absorbed]
        ) / total
        counts[survivor] = total
        merged = (adjacency[survivor] | adjacency[absorbed]) - {survivor, absorbed}
        adjacency[survivor] = merged
        for other in adjacency:
            if absorbed in adjacency[other]:
                adjacency[other].discard(absorbed)
                if other != survivor:
                    adjacency[other].add(survivor)
        del counts[absorbed], mean_lab[absorbed], adjacency[absorbed]
        merged_into[absorbed] = survivor

    while len(counts) > 1:
        pairs = [
            (distance(a, b), a, b) for a in counts for b in adjacency[a] if a < b
        ]
        candidates = [p for p in pairs if p[0] <= threshold]
        if candidates:
            _, a, b = min(candidates)
            merge(a, b)
            continue
        small = [
            (counts[r], r) for r in counts if counts[r] < min_px and adjacency[r]
        ]
        if not small:
            break
        _, r = min(small)
        neighbor = min(adjacency[r], key=lambda n: (distance(r, n), n))
        merge(neighbor, r)

    def resolve(rid):
        while rid in merged_into:
            rid = merged_into[rid]
        return rid

    return counts, mean_lab, {rid: resolve(rid) for rid in merged_into} | {
        rid: rid for rid in counts
    }
