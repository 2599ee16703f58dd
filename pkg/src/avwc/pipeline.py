"""Permutation robustification, random-code reduction and elimination of randomness.

A permutation member applies the inverse positional shuffle to every codeword
and decoding set, so its error at a state sequence equals the base code's
error at the shuffled sequence.  Averages over the whole permutation group
therefore depend on a sequence only through its type, which gives a fast path
that never materializes all n! members.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import (
    AVWC,
    Distribution,
    check_enumeration,
    iid_extension,
    sequence_symbols,
    word_matrix,
)
from .coding import (
    ERASURE,
    RandomCode,
    ReductionReport,
    WiretapCode,
    conditional_output_given_position_channels,
    error_probability,
    leakage_bits,
)
from .errors import PrefixSearchFailureError, ReductionFailureError
from .information import joint_mi_from_array
from .typicality import conditional_word_probabilities


def permute_word(word: Sequence[int], sigma: Sequence[int]) -> tuple[int, ...]:
    """Positional shuffle: entry i of the result is word[sigma[i]]."""
    return tuple(int(word[sigma[i]]) for i in range(len(sigma)))


def _apply_inverse_permutation(code: WiretapCode, sigma: Sequence[int]) -> WiretapCode:
    """Member code with codewords and decoding sets shuffled by the inverse map."""
    n = code.n
    sigma = tuple(sigma)
    sigma_inv = tuple(int(v) for v in np.argsort(sigma))
    codewords = code.codewords[:, :, list(sigma_inv)]
    outputs = word_matrix(code.output_size, n)
    powers = code.output_size ** np.arange(n - 1, -1, -1)
    permuted_indices = outputs[:, list(sigma)] @ powers
    decoder = code.decoder[permuted_indices]
    return WiretapCode(
        n=n,
        input_size=code.input_size,
        output_size=code.output_size,
        codewords=codewords,
        decoder=decoder,
        design_p=code.design_p,
        design_delta=code.design_delta,
    )


class PermutationFamily(Sequence[WiretapCode]):
    """Lazy view of the permutation orbit of a base code."""

    def __init__(self, base: WiretapCode):
        self._base = base
        self._perms = list(itertools.permutations(range(base.n)))

    @property
    def base(self) -> WiretapCode:
        return self._base

    def permutation(self, index: int) -> tuple[int, ...]:
        return self._perms[index]

    def __len__(self) -> int:
        return len(self._perms)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        return _apply_inverse_permutation(self._base, self._perms[index])


def robustify(code: WiretapCode, avwc: AVWC) -> RandomCode:
    """Uniformly selected permutation family of the code, members materialized lazily."""
    if avwc.input_size != code.input_size or avwc.main_output_size != code.output_size:
        raise ValueError("code alphabets do not match the channel family")
    factorial = math.factorial(code.n)
    check_enumeration(factorial, "permutation family")
    family = PermutationFamily(code)
    return RandomCode(members=family, mu=Distribution.uniform(factorial), origin="permutation-family")


def type_class_sequences(s, state_count: int) -> list[tuple[int, ...]]:
    """Distinct sequences sharing the type of s, lexicographic order."""
    symbols = sequence_symbols(s, state_count)
    return sorted(set(itertools.permutations(symbols)))


def permutation_mean_error(
    code: WiretapCode, avwc: AVWC, s, method: str = "type"
) -> float:
    """Mean error of the permutation family at s.

    ``type`` averages the base code over the type class of s (every group
    element weights class members equally); ``explicit`` loops over all n!
    members and must agree to roundoff.
    """
    symbols = sequence_symbols(s, avwc.state_count)
    if method == "type":
        seqs = type_class_sequences(symbols, avwc.state_count)
        return float(np.mean([error_probability(code, avwc, seq) for seq in seqs]))
    if method == "explicit":
        total = 0.0
        count = 0
        for sigma in itertools.permutations(range(code.n)):
            member = _apply_inverse_permutation(code, sigma)
            total += error_probability(member, avwc, symbols)
            count += 1
        return total / count
    raise ValueError(f"unknown method {method!r}")


def state_types(state_count: int, n: int) -> list[Distribution]:
    """All empirical distributions of length-n state sequences."""
    types = []
    for comp in itertools.combinations(range(n + state_count - 1), state_count - 1):
        parts = []
        prev = -1
        for cut in comp:
            parts.append(cut - prev - 1)
            prev = cut
        parts.append(n + state_count - 2 - prev)
        types.append(Distribution(np.asarray(parts, dtype=float) / n))
    return types


@dataclass(frozen=True, eq=False)
class RobustificationReport:
    gamma: float
    min_slack: float
    bound_coefficient: float
    per_sequence: tuple  # (symbols, group-averaged success, bound)

    @property
    def passed(self) -> bool:
        return self.min_slack >= -1e-12


def verify_robustification(
    code: WiretapCode, avwc: AVWC, q_set: Sequence[Distribution] | None = None
) -> RobustificationReport:
    """Exact check of the permutation-averaging inequality for every state sequence.

    gamma is the worst shortfall of the code's expected success under the
    i.i.d. extensions of the supplied weight vectors (state types of length n
    by default); each group-averaged success must then reach
    1 - 3 (n+1)^{|S|} gamma.
    """
    n, s_count = code.n, avwc.state_count
    check_enumeration(s_count**n, "robustification verification")
    sequences = list(itertools.product(range(s_count), repeat=n))
    success = {}
    for symbols in sequences:
        success[symbols] = 1.0 - error_probability(code, avwc, symbols)
    success_vec = np.array([success[symbols] for symbols in sequences])

    weights = list(q_set) if q_set is not None else state_types(s_count, n)
    gamma = 0.0
    for q in weights:
        iid = iid_extension(q, n)
        gamma = max(gamma, 1.0 - float(iid.probs @ success_vec))

    coefficient = 3.0 * (n + 1) ** s_count
    bound = 1.0 - coefficient * gamma
    rows = []
    min_slack = math.inf
    for symbols in sequences:
        averaged = float(np.mean([success[t] for t in type_class_sequences(symbols, s_count)]))
        rows.append((symbols, averaged, bound))
        min_slack = min(min_slack, averaged - bound)
    return RobustificationReport(
        gamma=gamma,
        min_slack=min_slack,
        bound_coefficient=coefficient,
        per_sequence=tuple(rows),
    )


# ---------------------------------------------------------------------------
# random code reduction
# ---------------------------------------------------------------------------

def reduction_count(n: int, input_size: int, state_count: int, epsilon: float) -> int:
    """Smallest member count satisfying the reduction sampling bound."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    bound = 2.0 * n * math.log2(input_size) * (1.0 + n * math.log2(state_count)) / epsilon
    return int(math.floor(bound)) + 1


def reduce_random_code(
    rc: RandomCode,
    avwc: AVWC,
    k_count: int | str | None = None,
    epsilon: float = 0.25,
    seed: int = 0,
    retry_cap: int = 20,
) -> RandomCode:
    """Draw K member codes i.i.d. from the selection law and verify the means.

    The reduced family must satisfy, for every state sequence, mean error and
    mean leakage at most epsilon; verification is exhaustive and attached to
    the returned code.  On failure the draw is retried with fresh counters up
    to ``retry_cap`` times before giving up with diagnostics.

    ``k_count`` may be an explicit integer, "bound" (default: the sampling
    bound), "n3" (cubic-in-blocklength preset), or "all" (keep every member
    exactly once, no sampling; requires a uniform selection law).
    """
    members = rc.members
    if len(members) == 0:
        raise ValueError("random code has no members")
    sample_n = members[0].n
    full_sample = False
    if k_count is None or k_count == "bound":
        k = reduction_count(sample_n, avwc.input_size, avwc.state_count, epsilon)
    elif k_count == "n3":
        k = sample_n**3
    elif k_count == "all":
        if not np.allclose(rc.mu.probs, 1.0 / len(members), atol=1e-12):
            raise ValueError("the 'all' preset needs a uniformly selected family")
        k = len(members)
        full_sample = True
    elif isinstance(k_count, int):
        k = k_count
    else:
        raise ValueError(f"unknown k_count preset {k_count!r}")
    if k < 1:
        raise ValueError("k_count must be at least 1")

    check_enumeration(avwc.state_count**sample_n, "reduction verification")
    sequences = list(itertools.product(range(avwc.state_count), repeat=sample_n))
    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def member_metrics(index: int) -> tuple[np.ndarray, np.ndarray]:
        if index not in cache:
            member = members[index]
            errs = np.array([error_probability(member, avwc, s) for s in sequences])
            leaks = np.array([leakage_bits(member, avwc, s) for s in sequences])
            cache[index] = (errs, leaks)
        return cache[index]

    cdf = np.cumsum(rc.mu.probs)
    cdf[-1] = 1.0
    best = None
    for attempt in range(1 if full_sample else retry_cap):
        if full_sample:
            picks = list(range(k))
        else:
            rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, attempt, 0]))
            picks = [int(np.searchsorted(cdf, rng.random(), side="right")) for _ in range(k)]
        mean_err = np.zeros(len(sequences))
        mean_leak = np.zeros(len(sequences))
        for index in picks:
            errs, leaks = member_metrics(index)
            mean_err += errs
            mean_leak += leaks
        mean_err /= k
        mean_leak /= k
        worst_err = float(mean_err.max())
        worst_leak = float(mean_leak.max())
        if best is None or max(worst_err, worst_leak) < max(best[0], best[1]):
            best = (worst_err, worst_leak)
        if worst_err <= epsilon and worst_leak <= epsilon:
            report = ReductionReport(
                success=True,
                k_count=k,
                epsilon=epsilon,
                attempts=attempt + 1,
                worst_mean_error=worst_err,
                worst_mean_leakage=worst_leak,
            )
            chosen = [members[i] for i in picks]
            return RandomCode(
                members=chosen,
                mu=Distribution.uniform(k),
                origin="reduced",
                verification=report,
            )
    raise ReductionFailureError(
        f"no draw of {k} members met epsilon={epsilon!r} within {retry_cap} attempts",
        diagnostics={
            "best_worst_mean_error": best[0],
            "best_worst_mean_leakage": best[1],
            "attempts": retry_cap,
            "estimated_failure_probability": 1.0,
        },
    )


# ---------------------------------------------------------------------------
# elimination of randomness
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PrefixCode:
    codewords: np.ndarray  # (K, prefix_len)
    decoder: np.ndarray  # (output_size**prefix_len,) member index

    @property
    def k_count(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def length(self) -> int:
        return int(self.codewords.shape[1])


def _balanced_compositions(length: int, alphabet: int) -> list[tuple[int, ...]]:
    comps = []
    for comp in itertools.product(range(length + 1), repeat=alphabet):
        if sum(comp) == length:
            comps.append(comp)
    comps.sort(key=lambda c: (max(c), c))
    return comps


def _constant_composition_pool(length: int, alphabet: int, minimum: int) -> list[tuple[int, ...]]:
    pool: list[tuple[int, ...]] = []
    for comp in _balanced_compositions(length, alphabet):
        symbols = [s for s, cnt in enumerate(comp) for _ in range(cnt)]
        pool.extend(sorted(set(itertools.permutations(symbols))))
        if len(pool) >= minimum:
            break
    seen = set()
    unique = []
    for word in pool:
        if word not in seen:
            seen.add(word)
            unique.append(word)
    return unique


def search_prefix_code(
    avwc: AVWC, k_count: int, prefix_len: int, subset_cap: int = 200_000
) -> PrefixCode:
    """Deterministic K-codeword prefix code over the main channel family.

    Codewords come from a constant-composition pool (most balanced
    compositions first); subsets are scored by minimum pairwise Hamming
    distance with total distance as tie break, exhaustively when small and
    greedily otherwise.  Decoding is maximum likelihood under the uniform
    state mixture.
    """
    a = avwc.input_size
    if k_count > a**prefix_len:
        raise PrefixSearchFailureError(
            f"{k_count} prefix messages cannot fit into {a}^{prefix_len} words"
        )
    pool = _constant_composition_pool(prefix_len, a, k_count)
    if len(pool) < k_count:
        pool = [tuple(row) for row in word_matrix(a, prefix_len)]

    def score(words: Sequence[tuple[int, ...]]) -> tuple[int, int]:
        dists = [
            sum(1 for u, v in zip(w1, w2) if u != v)
            for w1, w2 in itertools.combinations(words, 2)
        ]
        return (min(dists), sum(dists)) if dists else (prefix_len, 0)

    best_words = None
    best_score = (-1, -1)
    if math.comb(len(pool), k_count) <= subset_cap:
        for subset in itertools.combinations(pool, k_count):
            sc = score(subset)
            if sc > best_score:
                best_score = sc
                best_words = subset
    else:
        chosen = [pool[0]]
        while len(chosen) < k_count:
            def min_dist(word):
                return min(sum(1 for u, v in zip(word, w) if u != v) for w in chosen)
            candidate = max((w for w in pool if w not in chosen), key=lambda w: (min_dist(w), w))
            chosen.append(candidate)
        best_words = tuple(chosen)

    codewords = np.array(best_words, dtype=int)
    uniform = Distribution.uniform(avwc.state_count)
    mixed = np.tensordot(uniform.probs, avwc.main_stack, axes=1)
    outputs = word_matrix(avwc.main_output_size, prefix_len)
    likelihood = np.stack(
        [conditional_word_probabilities(mixed, codewords[i], outputs) for i in range(k_count)]
    )
    decoder = np.argmax(likelihood, axis=0)
    return PrefixCode(codewords=codewords, decoder=decoder)


@dataclass(frozen=True, eq=False)
class EliminationReport:
    prefix_len: int
    k_count: int
    worst_total_error: float
    worst_error_sequence: tuple[int, ...]
    worst_prefix_error: float
    worst_mean_member_error: float
    error_decomposition_margin: float
    worst_payload_leakage: float
    worst_leakage_sequence: tuple[int, ...]
    worst_mean_member_leakage: float
    leakage_margin: float

    @property
    def passed(self) -> bool:
        return self.error_decomposition_margin >= -1e-12 and self.leakage_margin >= -1e-9


@dataclass(frozen=True, eq=False)
class EliminationResult:
    code: WiretapCode
    prefix: PrefixCode
    report: EliminationReport


def eliminate_randomness(
    reduced: RandomCode,
    avwc: AVWC,
    prefix_len: int,
    prefix_code: PrefixCode | None = None,
) -> EliminationResult:
    """Concatenate a member-identifying prefix with each member code.

    The returned deterministic code transmits (member index, payload) pairs;
    decoding first identifies the member from the prefix block and then the
    payload with that member's decoder.  The report verifies, exactly and for
    every state sequence of the combined length, that the total error is at
    most prefix error plus mean member error, and that the payload leakage is
    at most the mean member leakage.
    """
    members = list(reduced.members)
    k = len(members)
    if k == 0:
        raise ValueError("reduced code has no members")
    if not np.allclose(reduced.mu.probs, 1.0 / k, atol=1e-12):
        raise ValueError("elimination requires a uniformly selected family")
    base = members[0]
    for m in members:
        if (m.n, m.j_count, m.l_count) != (base.n, base.j_count, base.l_count):
            raise ValueError("members must share block length and code size")

    prefix = prefix_code or search_prefix_code(avwc, k, prefix_len)
    if prefix.k_count != k or prefix.length != prefix_len:
        raise ValueError("prefix code shape does not match the member count")

    n = base.n
    j_count = base.j_count
    l_count = base.l_count
    b = avwc.main_output_size
    c = avwc.eaves_output_size
    total_len = prefix_len + n
    check_enumeration(avwc.state_count**total_len, "elimination verification")
    check_enumeration(b**total_len * k * j_count * l_count, "combined code evaluation")

    # combined codewords and decoder
    codewords = np.zeros((k * j_count, l_count, total_len), dtype=int)
    for i in range(k):
        for j in range(j_count):
            for l in range(l_count):
                codewords[i * j_count + j, l, :prefix_len] = prefix.codewords[i]
                codewords[i * j_count + j, l, prefix_len:] = members[i].codewords[j, l]
    decoder = np.full(b**total_len, ERASURE, dtype=int)
    payload_block = b**n
    for u_idx in range(b**prefix_len):
        i = int(prefix.decoder[u_idx])
        member_decoder = members[i].decoder
        block = np.where(
            member_decoder == ERASURE, ERASURE, i * j_count + member_decoder
        )
        decoder[u_idx * payload_block : (u_idx + 1) * payload_block] = block
    combined = WiretapCode(
        n=total_len,
        input_size=avwc.input_size,
        output_size=b,
        codewords=codewords,
        decoder=decoder,
    )

    # per-prefix-sequence success of each prefix message
    prefix_outputs = word_matrix(b, prefix_len)
    prefix_success: dict[tuple[int, ...], np.ndarray] = {}
    eaves_prefix_rows: dict[tuple[int, ...], np.ndarray] = {}
    eaves_out = word_matrix(c, prefix_len)
    for s_pre in itertools.product(range(avwc.state_count), repeat=prefix_len):
        rows_main = [avwc.main_stack[s] for s in s_pre]
        rows_eaves = [avwc.eaves_stack[s] for s in s_pre]
        succ = np.zeros(k)
        arows = np.zeros((k, c**prefix_len))
        for i in range(k):
            probs = np.ones(1)
            for pos, row in enumerate(rows_main):
                probs = np.multiply.outer(probs, row[prefix.codewords[i, pos]]).ravel()
            succ[i] = probs[prefix.decoder == i].sum()
            eprobs = np.ones(1)
            for pos, row in enumerate(rows_eaves):
                eprobs = np.multiply.outer(eprobs, row[prefix.codewords[i, pos]]).ravel()
            arows[i] = eprobs
        prefix_success[s_pre] = succ
        eaves_prefix_rows[s_pre] = arows

    # per-payload-sequence member metrics
    member_err: dict[tuple[int, ...], np.ndarray] = {}
    member_succ: dict[tuple[int, ...], np.ndarray] = {}
    member_leak: dict[tuple[int, ...], np.ndarray] = {}
    member_cond: dict[tuple[int, ...], np.ndarray] = {}
    for s_pay in itertools.product(range(avwc.state_count), repeat=n):
        errs = np.array([error_probability(m, avwc, s_pay) for m in members])
        member_err[s_pay] = errs
        member_succ[s_pay] = 1.0 - errs
        member_leak[s_pay] = np.array([leakage_bits(m, avwc, s_pay) for m in members])
        member_cond[s_pay] = np.stack(
            [
                conditional_output_given_position_channels(
                    m, [avwc.eaves_stack[s] for s in s_pay]
                )
                for m in members
            ]
        )

    worst_total, worst_total_seq = -1.0, None
    worst_leak, worst_leak_seq = -1.0, None
    err_margin = math.inf
    leak_margin = math.inf
    worst_prefix_error = max(
        float(np.mean(1.0 - succ)) for succ in prefix_success.values()
    )
    worst_member_error = max(float(e.mean()) for e in member_err.values())
    worst_member_leak = max(float(v.mean()) for v in member_leak.values())
    for s_pre, succ_pre in prefix_success.items():
        pre_err = float(np.mean(1.0 - succ_pre))
        arows = eaves_prefix_rows[s_pre]
        for s_pay in member_err:
            total = 1.0 - float(np.mean(succ_pre * member_succ[s_pay]))
            seq = s_pre + s_pay
            if total > worst_total:
                worst_total, worst_total_seq = total, seq
            bound = pre_err + float(member_err[s_pay].mean())
            err_margin = min(err_margin, bound - total)

            # payload leakage: member identity acts as encoder randomness
            joint = np.einsum("iu,ijz->juz", arows, member_cond[s_pay]) / (k * j_count)
            leak = joint_mi_from_array(joint.reshape(j_count, -1))
            if leak > worst_leak:
                worst_leak, worst_leak_seq = leak, seq
            leak_margin = min(leak_margin, float(member_leak[s_pay].mean()) - leak)

    report = EliminationReport(
        prefix_len=prefix_len,
        k_count=k,
        worst_total_error=worst_total,
        worst_error_sequence=worst_total_seq,
        worst_prefix_error=worst_prefix_error,
        worst_mean_member_error=worst_member_error,
        error_decomposition_margin=err_margin,
        worst_payload_leakage=worst_leak,
        worst_leakage_sequence=worst_leak_seq,
        worst_mean_member_leakage=worst_member_leak,
        leakage_margin=leak_margin,
    )
    return EliminationResult(code=combined, prefix=prefix, report=report)
