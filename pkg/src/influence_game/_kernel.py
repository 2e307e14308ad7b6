"""Compiled inner loop of the influence game.

Mirrors engine.step exactly: same xoshiro256** draws in the same order and
the same float expression structure, so a kernel run and a step-by-step
Python run of the same seed produce bit-identical trajectories (tested).

State lives in flat numpy arrays; neighborhoods are CSR (indptr/indices).
Attribution codes: 0 same-opinion, 1 homophily, 2 influence, 3 rejected.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

ATTR_SAME = 0
ATTR_HOMOPHILY = 1
ATTR_INFLUENCE = 2
ATTR_REJECTED = 3

_U5 = np.uint64(5)
_U7 = np.uint64(7)
_U9 = np.uint64(9)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U45 = np.uint64(45)
_U57 = np.uint64(57)
_U64 = np.uint64(64)
_DOUBLE_UNIT = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _next_u64(state):
    s1 = state[1]
    x = s1 * _U5
    result = ((x << _U7) | (x >> _U57)) * _U9
    t = s1 << _U17
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = (state[3] << _U45) | (state[3] >> (_U64 - _U45))
    return result


@njit(cache=True, inline="always")
def _random(state):
    return float(_next_u64(state) >> _U11) * _DOUBLE_UNIT


@njit(cache=True, inline="always")
def _randbelow(state, n):
    un = np.uint64(n)
    threshold = (np.uint64(0) - un) % un  # == 2**64 mod n
    while True:
        u = _next_u64(state)
        if u >= threshold:
            return int(u % un)


@njit(cache=True, inline="always")
def _logistic(delta):
    if delta >= 0.0:
        return 1.0 / (1.0 + math.exp(-delta))
    e = math.exp(delta)
    return e / (1.0 + e)


@njit(cache=True, inline="always")
def _ball_counts(cnt, num_opinions, indptr, indices, opinions, node):
    for k in range(num_opinions):
        cnt[k] = 0
    for j in range(indptr[node], indptr[node + 1]):
        cnt[opinions[indices[j]]] += 1


@njit(cache=True, inline="always")
def _majority(cnt, num_opinions, current_opinion):
    """Argmax with ties going to the agent's current opinion when it ties,
    otherwise to the lowest opinion id."""
    maxc = 0
    for k in range(num_opinions):
        if cnt[k] > maxc:
            maxc = cnt[k]
    if cnt[current_opinion] == maxc:
        return current_opinion
    for k in range(num_opinions):
        if cnt[k] == maxc:
            return k
    return 0


@njit(cache=True)
def run_steps(
    rng_state,
    opinions,
    budgets,
    change_costs,
    committed,
    counts,
    k_indptr,
    k_indices,
    i_indptr,
    i_indices,
    offer_amounts,
    reward,
    debit_speaker,
    own_baseline,
    t_start,
    n_steps,
    early_stop,
    t_absorbed,
    flips_homophily,
    flips_influence,
    total_offers,
    record,
    rec_speaker,
    rec_listener,
    rec_speaker_opinion,
    rec_listener_opinion,
    rec_offer,
    rec_delta,
    rec_p_accept,
    rec_accepted,
    rec_attribution,
):
    """Advance the game n_steps interactions (or until absorption if early_stop).

    Returns (t_end, t_absorbed, flips_homophily, flips_influence, total_offers).
    When record is True the rec_* arrays are filled from index 0.
    """
    n = opinions.shape[0]
    num_opinions = counts.shape[0]
    cnt = np.zeros(num_opinions, dtype=np.int64)
    t = t_start
    for step_idx in range(n_steps):
        if early_stop and t_absorbed >= 0:
            break
        t += 1
        s = _randbelow(rng_state, n)
        ball_lo = i_indptr[s]
        ball_size = i_indptr[s + 1] - ball_lo
        listener = int(i_indices[ball_lo + _randbelow(rng_state, ball_size)])
        o_s = opinions[s]
        o_l = opinions[listener]
        offer = 0.0
        delta = 0.0
        p_accept = 0.0
        need_full = record or (o_s != o_l and not committed[listener])
        if need_full:
            if o_s != o_l:
                # speaker side: offer only if flipping the listener would flip
                # the speaker's perceived majority in its favor
                _ball_counts(cnt, num_opinions, k_indptr, k_indices, opinions, s)
                cnt[o_s] += 1  # the speaker's own opinion
                m_s = _majority(cnt, num_opinions, o_s)
                lo = k_indptr[s]
                hi = k_indptr[s + 1]
                in_knowledge = False
                while lo < hi:
                    mid = (lo + hi) // 2
                    if k_indices[mid] < listener:
                        lo = mid + 1
                    else:
                        hi = mid
                if lo < k_indptr[s + 1] and k_indices[lo] == listener:
                    in_knowledge = True
                if in_knowledge:
                    cnt[o_l] -= 1
                    cnt[o_s] += 1
                    m_s_flip = _majority(cnt, num_opinions, o_s)
                else:
                    m_s_flip = m_s
                e_now = (reward if o_s == m_s else 0.0) + budgets[s]
                e_flip = (reward if o_s == m_s_flip else 0.0) + budgets[s]
                if e_flip > e_now:
                    offer = offer_amounts[o_s]
            # listener side: expected gain from committing to the speaker's opinion
            _ball_counts(cnt, num_opinions, k_indptr, k_indices, opinions, listener)
            cnt[o_l] += 1
            m_l = _majority(cnt, num_opinions, o_l)
            cnt[o_l] -= 1
            cnt[o_s] += 1
            m_l_flip = _majority(cnt, num_opinions, o_l)
            e_flip_l = (reward if o_s == m_l_flip else 0.0) + budgets[listener]
            if own_baseline:
                e_base = (reward if o_l == m_l else 0.0) + budgets[listener]
            else:
                e_base = (reward if o_s == m_l else 0.0) + budgets[listener]
            delta = e_flip_l - change_costs[listener] + offer - e_base
            if not committed[listener]:
                p_accept = _logistic(delta)
        u = _random(rng_state)
        accepted = u < p_accept
        if accepted and o_l != o_s:
            opinions[listener] = o_s
            counts[o_l] -= 1
            counts[o_s] += 1
            budgets[listener] += offer
            total_offers += offer
            if debit_speaker:
                budgets[s] -= offer
            if offer > 0.0:
                flips_influence += 1
            else:
                flips_homophily += 1
            if counts[o_s] == n and t_absorbed < 0:
                t_absorbed = t
        if record:
            idx = t - 1
            rec_speaker[idx] = s
            rec_listener[idx] = listener
            rec_speaker_opinion[idx] = o_s
            rec_listener_opinion[idx] = o_l
            rec_offer[idx] = offer
            rec_delta[idx] = delta
            rec_p_accept[idx] = p_accept
            rec_accepted[idx] = accepted
            if o_s == o_l:
                rec_attribution[idx] = ATTR_SAME
            elif accepted and offer > 0.0:
                rec_attribution[idx] = ATTR_INFLUENCE
            elif accepted:
                rec_attribution[idx] = ATTR_HOMOPHILY
            else:
                rec_attribution[idx] = ATTR_REJECTED
    return t, t_absorbed, flips_homophily, flips_influence, total_offers
