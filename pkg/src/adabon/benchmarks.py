"""Synthetic prompt universes for desk-scale experiments."""

from __future__ import annotations

from .distributions import Gaussian, GaussianMixture
from .streams import make_rng


def mixture_vs_point_mass(K: int, n_batches: int, seed: int = 0, *,
                          near_sigma: float = 1e-3, n_components: int = 2,
                          spread: float = 1.0):
    """Batches holding one wide Gaussian mixture and ``K - 1`` near point masses.

    The mixture's means are uniform on ``[-spread, spread]``, its component
    sigmas uniform on ``[0.5, 1] * spread``.  The other prompts are Gaussians
    with sigma ``near_sigma`` and means uniform on ``[-spread, spread]``.
    The mixture's position within each batch is random.

    Returns ``(universe, batches)``: a dict of prompt id to distribution and
    a list of ``n_batches`` lists of ``K`` ids.
    """
    if K < 1 or n_batches < 1:
        raise ValueError("need K >= 1 and n_batches >= 1")
    rng = make_rng(seed, "universe", "mixture_vs_point_mass", K)
    universe, batches = {}, []
    for b in range(n_batches):
        wide_slot = int(rng.integers(0, K))
        ids = []
        for i in range(K):
            pid = f"b{b:03d}-p{i:02d}"
            if i == wide_slot:
                w = rng.uniform(0.2, 1.0, size=n_components)
                universe[pid] = GaussianMixture(
                    weights=tuple(w / w.sum()),
                    mus=tuple(rng.uniform(-spread, spread, size=n_components)),
                    sigmas=tuple(rng.uniform(0.5, 1.0, size=n_components) * spread))
            else:
                universe[pid] = Gaussian(float(rng.uniform(-spread, spread)), near_sigma)
            ids.append(pid)
        batches.append(ids)
    return universe, batches


GENERATORS = {"mixture_vs_point_mass": mixture_vs_point_mass}
