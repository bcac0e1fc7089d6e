#!/usr/bin/env python3
"""
Agent Memory - Replay memory of circuit-building transitions
"""

from collections import deque
from typing import List

import numpy as np

from quantum.observables import CorrelatorVector

DEFAULT_CAPACITY = 32


class Transition:
    """(s_t, a_t, s_t+1, r_t, terminal) as stored in replay memory"""

    def __init__(self, s: CorrelatorVector, a: int, s_next: CorrelatorVector,
                 r: float, terminal: bool):
        self.s = s
        self.a = a
        self.s_next = s_next
        self.r = r
        self.terminal = terminal

    def __repr__(self) -> str:
        return f"Transition(a={self.a}, r={self.r:.4f}, terminal={self.terminal})"


class ReplayMemory:
    """Fixed-capacity ring buffer; the oldest transition is evicted first"""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError(f"Replay memory capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.transitions = deque(maxlen=capacity)

    def push(self, transition: Transition):
        self.transitions.append(transition)

    def sample(self, rng: np.random.Generator) -> Transition:
        """One transition drawn uniformly"""
        if not self.transitions:
            raise ValueError("Cannot sample from an empty replay memory")
        return self.transitions[int(rng.integers(len(self.transitions)))]

    def sample_batch(self, batch_size: int, rng: np.random.Generator) -> List[Transition]:
        return [self.sample(rng) for _ in range(batch_size)]

    def __len__(self) -> int:
        return len(self.transitions)
