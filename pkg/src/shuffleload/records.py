from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class RunRecord:
    """Measured shuffle load of one run of one (maps, reduces) configuration."""

    num_maps: int
    num_reduces: int
    input_bytes: int
    run_index: int
    shuffle_bytes: float
    app: str = ""

    def __post_init__(self):
        if self.num_maps < 1 or self.num_reduces < 1:
            raise ValueError("task counts must be >= 1")
        if not (self.shuffle_bytes >= 0) or math.isinf(self.shuffle_bytes):
            raise ValueError(f"shuffle_bytes must be finite and >= 0, got {self.shuffle_bytes!r}")

    @property
    def config(self) -> tuple[int, int]:
        return (self.num_maps, self.num_reduces)
