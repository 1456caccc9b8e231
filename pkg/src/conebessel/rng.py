"""Counter-based random streams for reproducible, parallel-safe Monte Carlo.

Every chunk of samples gets its own Philox stream keyed by (seed, chunk
index).  Chunk results are reduced in index order, so an estimate is a pure
function of (seed, n_samples) no matter how many workers computed the
chunks.  Uniform draws are turned into the target laws by inverse CDF so the
draw count per sample is fixed.
"""

import numpy as np
from scipy.special import gammaincinv, ndtri

# Samples per chunk.  Big enough to amortize numpy call overhead, small
# enough that partial chunks at the tail are cheap to recompute.
CHUNK = 1 << 16


def substream(seed, index):
    """Independent Generator for chunk `index` of the stream `seed`."""
    return np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(index)]))


def chunk_ranges(n):
    """Yield (chunk_index, start, stop) covering range(n) in CHUNK pieces."""
    for c in range((n + CHUNK - 1) // CHUNK):
        yield c, c * CHUNK, min((c + 1) * CHUNK, n)


def uniforms(seed, index, shape):
    """Open-interval uniforms for one chunk, fixed count per call."""
    u = substream(seed, index).random(shape)
    # keep strictly inside (0,1) so inverse CDFs stay finite
    return np.clip(u, 1e-300, 1.0 - 1e-16)


def normal_from_uniform(u):
    return ndtri(u)


def laplace_from_uniform(u):
    """Standard Laplace by inverse CDF: median-split sign, log tail."""
    half = u - 0.5
    return -np.sign(half) * np.log1p(-2.0 * np.abs(half))


def inverse_gamma_from_uniform(u, alpha, beta):
    """Inverse-gamma(alpha, beta): density ~ s^(-alpha-1) exp(-beta/s).

    If G ~ Gamma(alpha, 1) then beta/G has the target law; the gamma draw
    comes from the inverse regularized incomplete gamma.
    """
    g = gammaincinv(alpha, u)
    return beta / g


def chi2_from_uniform(u, df):
    return 2.0 * gammaincinv(0.5 * df, u)
