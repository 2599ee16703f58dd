"""Exact entropy, mutual information and KL divergence on finite alphabets, in bits.

Conventions 0*log 0 = 0 and 0*log(0/0) = 0 are handled by explicit masking,
never by epsilon flooring, so values are exact on simplex boundaries.
"""

from __future__ import annotations

import math

import numpy as np

from .channels import Channel, Distribution


def xlog2x(values: np.ndarray) -> np.ndarray:
    """Elementwise x*log2(x) with the 0*log 0 = 0 convention."""
    values = np.asarray(values, dtype=float)
    safe = np.where(values > 0.0, values, 1.0)
    return np.where(values > 0.0, values * np.log2(safe), 0.0)


def entropy_from_array(probs: np.ndarray) -> float:
    return float(-np.sum(xlog2x(probs)))


def mi_from_arrays(px: np.ndarray, rows: np.ndarray) -> float:
    """I(p, W) = H(pW) - sum_x p(x) H(W(.|x)); tiny negative roundoff clamps to 0."""
    out = px @ rows
    value = -np.sum(xlog2x(out)) + px @ np.sum(xlog2x(rows), axis=1)
    return float(value) if value > 0.0 else 0.0


def entropy(p: Distribution) -> float:
    """Shannon entropy in bits."""
    return entropy_from_array(p.probs)


def mutual_information(p: Distribution, w: Channel) -> float:
    """Mutual information between the input p and the output of channel w, in bits."""
    if p.support_size != w.input_size:
        raise ValueError("input distribution does not match channel input size")
    return mi_from_arrays(p.probs, w.rows)


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """D(p || q) in bits; returns math.inf when absolute continuity fails."""
    if p.support_size != q.support_size:
        raise ValueError("divergence requires equal support sizes")
    mask = p.probs > 0.0
    if np.any(q.probs[mask] == 0.0):
        return math.inf
    pm = p.probs[mask]
    qm = q.probs[mask]
    return float(np.sum(pm * (np.log2(pm) - np.log2(qm))))


def joint_mi_from_array(joint: np.ndarray) -> float:
    """I between the two coordinates of a joint given as a 2-D probability array."""
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 2:
        raise ValueError("joint distribution must be a 2-D array")
    row = joint.sum(axis=1)
    col = joint.sum(axis=0)
    mask = joint > 0.0
    prod = np.outer(row, col)
    value = float(np.sum(joint[mask] * (np.log2(joint[mask]) - np.log2(prod[mask]))))
    return value if value > 0.0 else 0.0


def joint_mutual_information(
    p_joint,
    first_size: int | None = None,
    second_size: int | None = None,
) -> float:
    """I(J; Z) from a joint over pairs.

    Accepts either a 2-D array indexed [j, z] or a flat Distribution over
    lexicographic (j, z) pairs together with the two factor sizes.
    """
    if isinstance(p_joint, Distribution):
        if first_size is None or second_size is None:
            raise ValueError("factor sizes are required for a flat joint distribution")
        if first_size * second_size != p_joint.support_size:
            raise ValueError("factor sizes do not multiply to the joint support size")
        joint = p_joint.probs.reshape(first_size, second_size)
    else:
        joint = np.asarray(p_joint, dtype=float)
    total = float(joint.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"joint entries sum to {total!r}, not 1")
    return joint_mi_from_array(joint)
