"""Small result records shared by the verification routines."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ErrorReport:
    """Comparison of an exact (or Monte-Carlo) quantity against its estimate.

    For Monte-Carlo comparisons ``stderr`` is the standard error of the
    empirical side and ``z`` the discrepancy in units of it.
    """

    name: str
    exact: float
    estimate: float
    stderr: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def abs_err(self) -> float:
        return abs(self.exact - self.estimate)

    @property
    def rel_err(self) -> float:
        scale = abs(self.estimate)
        return self.abs_err / scale if scale > 0 else math.inf

    @property
    def z(self) -> float | None:
        if self.stderr is None:
            return None
        if self.stderr == 0:
            return 0.0 if self.abs_err == 0 else math.inf
        return self.abs_err / self.stderr

    def within(self, n_se: float = 3.0, slack: float = 0.0) -> bool:
        if self.stderr is None:
            raise ValueError("no standard error attached")
        return self.abs_err <= n_se * self.stderr + slack
