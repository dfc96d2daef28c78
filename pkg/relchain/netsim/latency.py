"""
Seeded per-link message delays.
"""
import numpy as np


class LinkDelay:
    def __init__(self, base_ms, jitter_ms, seed=0, src=0, dst=0):
        """
        Uniform delay in [base_ms, base_ms + jitter_ms] for one directed link.

        Args:
        - base_ms (float): minimum delay.
        - jitter_ms (float): width of the uniform spread on top of base_ms.
        - seed (int): profile seed; combined with (src, dst) so every link draws its own stream.
        """
        self.base_ms = base_ms
        self.jitter_ms = jitter_ms
        self.seed = [seed, src, dst]
        self.rng = np.random.default_rng(self.seed)

    def sample(self):
        if self.jitter_ms == 0:
            return float(self.base_ms)
        return float(self.base_ms + self.rng.uniform(0.0, self.jitter_ms))

    def reset(self):
        self.rng = np.random.default_rng(self.seed)


def link_delays(profile, n_nodes):
    """One LinkDelay per ordered pair of distinct nodes."""
    delays = {}
    for src in range(n_nodes):
        for dst in range(n_nodes):
            if src != dst:
                base, jitter = profile.link(src, dst)
                delays[(src, dst)] = LinkDelay(base, jitter, seed=profile.seed, src=src, dst=dst)
    return delays
