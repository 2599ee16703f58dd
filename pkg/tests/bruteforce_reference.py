"""Independent brute-force reference for code evaluation.

Deliberately written with plain Python loops, dictionaries and math.log2,
sharing no enumeration helpers or numpy kernels with the package, so it can
serve as a second implementation when checking exact error and leakage
values.
"""

import itertools
import math


def brute_error(codewords, decoder_map, main_rows_per_state, state_seq):
    """Average decoding error; codewords[j][l] are symbol tuples.

    ``decoder_map`` maps output tuples to a message index (missing = erasure).
    ``main_rows_per_state[s][x][y]`` is the transition probability.
    """
    n = len(state_seq)
    j_count = len(codewords)
    output_size = len(main_rows_per_state[0][0])
    total_success = 0.0
    uses = 0
    for j, words in enumerate(codewords):
        for word in words:
            uses += 1
            for y in itertools.product(range(output_size), repeat=n):
                if decoder_map.get(tuple(y), None) != j:
                    continue
                prob = 1.0
                for i in range(n):
                    prob *= main_rows_per_state[state_seq[i]][word[i]][y[i]]
                total_success += prob
    return 1.0 - total_success / uses


def brute_leakage(codewords, eaves_rows_per_state, state_seq):
    """I(J; Z^n) in bits with J uniform and l-averaged conditionals."""
    n = len(state_seq)
    j_count = len(codewords)
    output_size = len(eaves_rows_per_state[0][0])
    cond = {}
    for j, words in enumerate(codewords):
        for y in itertools.product(range(output_size), repeat=n):
            total = 0.0
            for word in words:
                prob = 1.0
                for i in range(n):
                    prob *= eaves_rows_per_state[state_seq[i]][word[i]][y[i]]
                total += prob
            cond[(j, y)] = total / len(words)

    marginal = {}
    for (j, y), value in cond.items():
        marginal[y] = marginal.get(y, 0.0) + value / j_count

    info = 0.0
    for (j, y), value in cond.items():
        joint = value / j_count
        if joint > 0.0:
            info += joint * math.log2(joint / ((1.0 / j_count) * marginal[y]))
    return max(info, 0.0)


def brute_worst_case(codewords, decoder_map, main_rows, eaves_rows, state_count, n):
    """Max error and max leakage over all state sequences."""
    worst_error = -1.0
    worst_leak = -1.0
    for seq in itertools.product(range(state_count), repeat=n):
        err = brute_error(codewords, decoder_map, main_rows, seq)
        leak = brute_leakage(codewords, eaves_rows, seq)
        worst_error = max(worst_error, err)
        worst_leak = max(worst_leak, leak)
    return worst_error, worst_leak
