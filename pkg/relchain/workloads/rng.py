"""
SplitMix64, the generator behind every workload draw (docs/workloads.md).

Statement i of a run draws from its own stream seeded with
seed + (i + 1) * GAMMA, so any statement can be regenerated without the
ones before it.
"""
MASK = 2 ** 64 - 1
GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB
# population draws use seed ^ POPULATION_SALT so they never share a stream with statement i
POPULATION_SALT = 0xD1B54A32D192ED03


class SplitMix64:

    def __init__(self, seed):
        self.state = seed & MASK

    def next_u64(self):
        self.state = (self.state + GAMMA) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * MIX_1) & MASK
        z = ((z ^ (z >> 27)) * MIX_2) & MASK
        return z ^ (z >> 31)

    def uniform(self, lo, hi):
        """Integer in [lo, hi], by modulo reduction."""
        return lo + self.next_u64() % (hi - lo + 1)

    def choice(self, seq):
        return seq[self.uniform(0, len(seq) - 1)]

    def token(self, size):
        """size lowercase hex characters."""
        out = ""
        while len(out) < size:
            out += f"{self.next_u64():016x}"
        return out[:size]

    def shuffle(self, items):
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.uniform(0, i)
            items[i], items[j] = items[j], items[i]
        return items


def stream(seed, index):
    return SplitMix64((seed + (index + 1) * GAMMA) & MASK)


def population_rng(seed):
    return SplitMix64(seed ^ POPULATION_SALT)
