"""Deterministic Gaussian noise for synthetic test sequences.

Algorithm ``philox4x64-boxmuller/1``:

* raw stream: numpy's ``Philox`` bit generator (Philox4x64-10, counter based)
  seeded with the 64-bit integer seed, read with ``random_raw``;
* uniforms: ``u = ((x >> 11) + 0.5) * 2**-53``, strictly inside (0, 1);
* normals: consecutive raw words form pairs ``(u1, u2)`` giving
  ``r cos(2 pi u2)`` then ``r sin(2 pi u2)`` with ``r = sqrt(-2 ln u1)``;
* consumers draw all values they need in one call and use them in row-major
  order (frame, row, column).

Only the bit-generator stream is relied on; numpy's own ``Generator.normal``
is not, since its output is not guaranteed stable across versions.
"""

import numpy as np

ALGORITHM = "philox4x64-boxmuller/1"


def standard_normal(seed, n):
    """Return ``n`` standard normal draws for ``seed``."""
    if n == 0:
        return np.zeros(0)
    pairs = (n + 1) // 2
    raw = np.random.Philox(int(seed) & (2**64 - 1)).random_raw(2 * pairs)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:n]
