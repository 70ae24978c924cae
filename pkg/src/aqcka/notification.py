"""Anonymous notification of the receivers by XOR sharing.

For every target ``i`` each party ``j`` splits a parity bit into ``n`` random
shares, one per party ``k`` (itself included). Only Alice's row can have odd
parity, and only when ``i`` is a receiver. Each ``k`` forwards the XOR of the
shares it holds to ``i``, and ``i`` XORs what it gets.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import numpy as np

from .net import Network, Partition


@dataclass
class ShareMatrix:
    target: int
    bits: np.ndarray  # bits[j, k]: share chosen by j for k

    def row_parity(self, j: int) -> int:
        return int(np.bitwise_xor.reduce(self.bits[j]))

    def column_parity(self, k: int) -> int:
        return int(np.bitwise_xor.reduce(self.bits[:, k]))


def gen_shares(parities, rng) -> np.ndarray:
    """One uniformly random row per party whose XOR is that party's parity."""
    parities = np.asarray(parities, dtype=np.int64)
    n = parities.size
    free = rng.bits(n * (n - 1)).reshape(n, n - 1)
    last = (free.sum(axis=1) & 1) ^ parities
    return np.concatenate([free, last[:, None]], axis=1)


@lru_cache(maxsize=None)
def _grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.divmod(np.arange(n * n), n)
    rows.flags.writeable = cols.flags.writeable = False
    return rows, cols


def notification_loop(
    target: int, partition: Partition, net: Network, rng, silent: frozenset[int] = frozenset()
) -> tuple[int, ShareMatrix]:
    """One target loop; returns the target's notified bit and the shares.

    Parties in ``silent`` never send, which makes the receivers abort.
    """
    n = partition.n
    parities = np.zeros(n, dtype=np.int64)
    parities[partition.alice] = target in partition.bobs
    shares = gen_shares(parities, rng)
    with net.step("notification", target):
        # row j goes to every k, self-share included, in (j, k) order
        if silent:
            senders = np.array([j for j in range(n) if j not in silent], dtype=np.int64)
            net.send_block(np.repeat(senders, n), np.tile(np.arange(n), len(senders)), shares[senders].ravel())
            net.abort([min(silent)])
        rows, cols = _grid(n)
        net.send_block(rows, cols, shares.ravel())
        z_k = shares.sum(axis=0) & 1
        net.send_block(cols[:n], np.full(n, target), z_k)
        z = int(z_k.sum() & 1)
    return z, ShareMatrix(target, shares)


def run_notification(
    partition: Partition, net: Network, rng, silent: frozenset[int] = frozenset()
) -> dict[int, int]:
    """Run the target loops for every party in ascending order."""
    return {i: notification_loop(i, partition, net, rng, silent)[0] for i in range(partition.n)}


def channel_uses(n: int) -> int:
    """Private sends per full run: n target loops of n*n shares plus n forwards."""
    return n * (n * n + n)
