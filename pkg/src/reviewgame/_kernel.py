"""Compiled inner loops for the population dynamics.

Everything here is nopython numba over plain arrays. Strategy ids are
0-based. Random draws come from numpy ``Generator`` objects passed in from
Python, one per role, so the two populations never share a stream.

Per agent and round the draw order is fixed: revision coin, then (for a
reviser) mutation coin, then either one uniform strategy draw or
``n_candidates - 1`` peer draws followed by one logit draw.
"""

import numpy as np
from numba import njit

POPULATION_WEIGHTED = 0
UNIFORM_OVER_TYPES = 1


@njit(cache=True)
def avg_payoffs(table, opp_counts, mode, is_author, out):
    """Expected payoff of each own strategy against the opponent mix.

    ``table`` is indexed ``[effort, threshold]`` for both roles.
    """
    k = out.size
    total = 0.0
    for j in range(k):
        total += opp_counts[j]
    for s in range(k):
        acc = 0.0
        for j in range(k):
            v = table[s, j] if is_author else table[j, s]
            if mode == POPULATION_WEIGHTED:
                acc += v * opp_counts[j]
            else:
                acc += v
        if mode == POPULATION_WEIGHTED:
            out[s] = acc / total
        else:
            out[s] = acc / k


@njit(cache=True)
def _logit_weights(avg, eta, out):
    mx = avg[0]
    for s in range(1, avg.size):
        if avg[s] > mx:
            mx = avg[s]
    for s in range(avg.size):
        out[s] = np.exp((avg[s] - mx) / eta)


@njit(cache=True)
def _revise_one(rng, a, strat, weights, n_candidates, prob_mutation, stamp, stamp_id, tally):
    """New strategy for agent ``a``; returns (strategy, updated stamp id)."""
    k = weights.size
    n = strat.size
    if rng.random() < prob_mutation:
        return int(rng.random() * k), stamp_id
    stamp_id += 1
    stamp[a] = stamp_id
    for s in range(k):
        tally[s] = 0.0
    tally[strat[a]] += 1.0
    for _ in range(n_candidates - 1):
        while True:
            c = int(rng.random() * n)
            if stamp[c] != stamp_id:
                break
        stamp[c] = stamp_id
        tally[strat[c]] += 1.0
    # Rows sharing a strategy share its average payoff, so summing
    # exp(payoff / eta) over rows is tally * weight.
    tot = 0.0
    for s in range(k):
        tot += tally[s] * weights[s]
    u = rng.random() * tot
    acc = 0.0
    last = strat[a]
    for s in range(k):
        if tally[s] > 0.0:
            last = s
            acc += tally[s] * weights[s]
            if u < acc:
                return s, stamp_id
    return last, stamp_id


@njit(cache=True)
def _revise_role(rng, strat, counts, table, opp_counts, is_author, mode, eta,
                 prob_revision, prob_mutation, n_candidates, sequential,
                 stamp, stamp_id, out_idx, out_new, avg, weights, tally):
    """One role's revision pass. Returns (n revisers, n queued, stamp id).

    Sequential mode writes each revision back immediately; synchronous mode
    queues them in ``out_idx``/``out_new`` for the caller to apply.
    """
    avg_payoffs(table, opp_counts, mode, is_author, avg)
    _logit_weights(avg, eta, weights)
    n_rev = 0
    n_out = 0
    for a in range(strat.size):
        if rng.random() >= prob_revision:
            continue
        n_rev += 1
        new, stamp_id = _revise_one(rng, a, strat, weights, n_candidates,
                                    prob_mutation, stamp, stamp_id, tally)
        if sequential:
            old = strat[a]
            if new != old:
                strat[a] = new
                counts[old] -= 1
                counts[new] += 1
        else:
            out_idx[n_out] = a
            out_new[n_out] = new
            n_out += 1
    return n_rev, n_out, stamp_id


@njit(cache=True)
def _apply(strat, counts, out_idx, out_new, n_out):
    for q in range(n_out):
        a = out_idx[q]
        old = strat[a]
        new = out_new[q]
        if new != old:
            strat[a] = new
            counts[old] -= 1
            counts[new] += 1


@njit(cache=True)
def step(rng_a, rng_r, sa, sr, ca, cr, A, R, mode, eta, prob_revision,
         prob_mutation, n_candidates, sequential, stamp_a, stamp_r, ids, revs):
    """Advance both populations by one round in place.

    ``ids`` holds the two running stamp ids; ``revs`` receives the number of
    revision opportunities per role.
    """
    k = ca.size
    idx_a = np.empty(sa.size, np.int64)
    new_a = np.empty(sa.size, np.int64)
    idx_r = np.empty(sr.size, np.int64)
    new_r = np.empty(sr.size, np.int64)
    avg = np.empty(k)
    weights = np.empty(k)
    tally = np.empty(k)
    if sequential:
        # Authors move first; reviewers then face the updated author mix.
        cr0 = cr.copy()
        ra, _, ids[0] = _revise_role(rng_a, sa, ca, A, cr0, True, mode, eta, prob_revision,
                                     prob_mutation, n_candidates, True, stamp_a, ids[0],
                                     idx_a, new_a, avg, weights, tally)
        rr, _, ids[1] = _revise_role(rng_r, sr, cr, R, ca, False, mode, eta, prob_revision,
                                     prob_mutation, n_candidates, True, stamp_r, ids[1],
                                     idx_r, new_r, avg, weights, tally)
    else:
        ra, na, ids[0] = _revise_role(rng_a, sa, ca, A, cr, True, mode, eta, prob_revision,
                                      prob_mutation, n_candidates, False, stamp_a, ids[0],
                                      idx_a, new_a, avg, weights, tally)
        rr, nr, ids[1] = _revise_role(rng_r, sr, cr, R, ca, False, mode, eta, prob_revision,
                                      prob_mutation, n_candidates, False, stamp_r, ids[1],
                                      idx_r, new_r, avg, weights, tally)
        _apply(sa, ca, idx_a, new_a, na)
        _apply(sr, cr, idx_r, new_r, nr)
    revs[0] = ra
    revs[1] = rr


@njit(cache=True)
def run(rng_a, rng_r, sa, sr, A, R, rounds, record_every, mode, eta, prob_revision,
        prob_mutation, n_candidates, sequential):
    k = A.shape[0]
    ca = np.zeros(k, np.int64)
    cr = np.zeros(k, np.int64)
    for i in range(sa.size):
        ca[sa[i]] += 1
    for i in range(sr.size):
        cr[sr[i]] += 1
    n_rows = 1 + rounds // record_every
    if rounds % record_every != 0:
        n_rows += 1
    rec_round = np.zeros(n_rows, np.int64)
    rec_a = np.zeros((n_rows, k), np.int64)
    rec_r = np.zeros((n_rows, k), np.int64)
    rec_rev = np.zeros((n_rows, 2), np.int64)
    rec_a[0] = ca
    rec_r[0] = cr
    stamp_a = np.zeros(sa.size, np.int64)
    stamp_r = np.zeros(sr.size, np.int64)
    ids = np.zeros(2, np.int64)
    revs = np.zeros(2, np.int64)
    row = 1
    for t in range(1, rounds + 1):
        step(rng_a, rng_r, sa, sr, ca, cr, A, R, mode, eta, prob_revision,
             prob_mutation, n_candidates, sequential, stamp_a, stamp_r, ids, revs)
        if t % record_every == 0 or t == rounds:
            rec_round[row] = t
            rec_a[row] = ca
            rec_r[row] = cr
            rec_rev[row] = revs
            row += 1
    return rec_round, rec_a, rec_r, rec_rev
