"""Numba kernels for the boosted-tree hot loops.

All kernels are single-threaded and accumulate in a fixed order, so
fits are bit-deterministic; ``nogil`` lets callers parallelize across
independent fits with threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit

EPS_HESS = 1e-12


@njit(cache=True, nogil=True)
def build_histograms(codes, grad, hess, rows, offsets, hist_g, hist_h, hist_c):
    """Accumulate per-(feature, bin) gradient/hessian/count stats for one node.

    ``codes[r, j]`` is the bin of row r in feature j; each feature's bins
    occupy ``offsets[j]:offsets[j+1]`` in the flat histograms, with the
    final bin reserved for missing values.
    """
    p = codes.shape[1]
    for ii in range(rows.shape[0]):
        r = rows[ii]
        g = grad[r]
        h = hess[r]
        for j in range(p):
            b = offsets[j] + codes[r, j]
            hist_g[b] += g
            hist_h[b] += h
            hist_c[b] += 1


@njit(cache=True, nogil=True)
def best_split(hist_g, hist_h, hist_c, offsets, feature_ok, min_samples_leaf):
    """Exact greedy split over the sorted unique values present at the node.

    Scans features in ascending index and thresholds in ascending value,
    trying missing-goes-left before missing-goes-right; improvements are
    strict, so ties resolve to the lowest feature index, then the lowest
    threshold, then missing-left. Bins with no rows in the node are
    skipped: they duplicate the previous partition, and the strict
    comparison would keep the lower threshold anyway.

    Returns (feature, bin_index, missing_left, gain); feature is -1 when
    no valid split improves on the node score.
    """
    p = offsets.shape[0] - 1

    # node totals from feature 0's bins (identical for every feature)
    total_g = 0.0
    total_h = 0.0
    total_c = 0
    if p > 0:
        for b in range(offsets[0], offsets[1]):
            total_g += hist_g[b]
            total_h += hist_h[b]
            total_c += hist_c[b]
    parent_score = total_g * total_g / (total_h + EPS_HESS)

    best_feature = -1
    best_bin = -1
    best_missing_left = True
    best_gain = 0.0

    for j in range(p):
        if not feature_ok[j]:
            continue
        lo = offsets[j]
        hi = offsets[j + 1]
        n_finite = hi - lo - 1  # last bin is the missing bin
        if n_finite < 2:
            continue
        miss_g = hist_g[hi - 1]
        miss_h = hist_h[hi - 1]
        miss_c = hist_c[hi - 1]
        n_sides = 2 if miss_c > 0 else 1

        cum_g = 0.0
        cum_h = 0.0
        cum_c = 0
        for t in range(n_finite - 1):
            c_t = hist_c[lo + t]
            if c_t == 0:
                # empty bin: same partition as the previous threshold, and
                # strict improvement keeps the lower threshold on ties
                continue
            cum_g += hist_g[lo + t]
            cum_h += hist_h[lo + t]
            cum_c += c_t
            if cum_c > total_c - min_samples_leaf:
                break  # right side can never be large enough again
            for side in range(n_sides):
                if side == 0:
                    gl = cum_g + miss_g
                    hl = cum_h + miss_h
                    cl = cum_c + miss_c
                else:
                    gl = cum_g
                    hl = cum_h
                    cl = cum_c
                cr = total_c - cl
                if cl < min_samples_leaf or cr < min_samples_leaf:
                    continue
                gr = total_g - gl
                hr = total_h - hl
                gain = (
                    gl * gl / (hl + EPS_HESS)
                    + gr * gr / (hr + EPS_HESS)
                    - parent_score
                )
                if gain > best_gain:
                    best_gain = gain
                    best_feature = j
                    best_bin = t
                    best_missing_left = side == 0
    return best_feature, best_bin, best_missing_left, best_gain


@njit(cache=True, nogil=True)
def predict_trees(node_feature, node_threshold, node_missing_left, node_left,
                  node_right, node_value, tree_starts, X, out, scale):
    """Add ``scale`` times every tree's leaf value to ``out`` per row.

    Trees are concatenated in flat arrays; ``tree_starts[k]`` is the root
    index of tree k. Leaves are marked by ``node_feature < 0``.
    """
    n = X.shape[0]
    n_trees = tree_starts.shape[0]
    for i in range(n):
        acc = 0.0
        for k in range(n_trees):
            node = tree_starts[k]
            while node_feature[node] >= 0:
                v = X[i, node_feature[node]]
                if np.isnan(v):
                    node = node_left[node] if node_missing_left[node] else node_right[node]
                elif v <= node_threshold[node]:
                    node = node_left[node]
                else:
                    node = node_right[node]
            acc += node_value[node]
        out[i] += scale * acc
