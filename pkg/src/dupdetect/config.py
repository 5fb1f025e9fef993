from __future__ import annotations

import os
from dataclasses import asdict, dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class DetectorConfig:
    """Detector thresholds.

    Unset ``t_2``, ``t_s`` and ``t_n`` derive from the block size as
    ``2b``, ``b + 2`` and ``b``, which gives 32, 18 and 16 for ``b = 16``.

    ``signed_shift`` votes on signed origin differences instead of the
    component-wise absolute shift; it is off by default.
    """

    b: int = 16
    t_l: float = 0.014
    t_2: Optional[float] = None
    t_s: Optional[int] = None
    t_n: Optional[int] = None
    signed_shift: bool = False

    def __post_init__(self):
        if self.t_2 is None:
            object.__setattr__(self, "t_2", float(2 * self.b))
        if self.t_s is None:
            object.__setattr__(self, "t_s", self.b + 2)
        if self.t_n is None:
            object.__setattr__(self, "t_n", self.b)
        if self.b < 8 or self.b % 2:
            raise ValueError(f"block size must be even and >= 8, got {self.b}")
        if not self.t_l > 0:
            raise ValueError(f"t_l must be positive, got {self.t_l}")
        if not self.t_2 > 0:
            raise ValueError(f"t_2 must be positive, got {self.t_2}")
        if self.t_s < 1:
            raise ValueError(f"t_s must be >= 1, got {self.t_s}")
        if self.t_n < 1:
            raise ValueError(f"t_n must be >= 1, got {self.t_n}")

    def with_overrides(self, **overrides) -> "DetectorConfig":
        """Copy with the given fields replaced; ``None`` values are ignored.

        Changing ``b`` re-derives any threshold that was not overridden and
        still sits at its derived default.
        """
        overrides = {k: v for k, v in overrides.items() if v is not None}
        if "b" in overrides:
            b_old = self.b
            derived = {"t_2": float(2 * b_old), "t_s": b_old + 2, "t_n": b_old}
            for name, value in derived.items():
                if name not in overrides and getattr(self, name) == value:
                    overrides[name] = None
            fields = {**asdict(self), **overrides}
            return DetectorConfig(**fields)
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        return asdict(self)


THREADS_ENV = "DUPDETECT_THREADS"


def worker_count(requested: Optional[int] = None) -> int:
    """Resolve a worker count; ``0`` or unset means one per CPU.

    An explicit request is capped by ``DUPDETECT_THREADS`` when that is set
    to a positive value.
    """
    env = os.environ.get(THREADS_ENV, "").strip()
    try:
        cap = int(env) if env else 0
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if cap < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0, got {cap}")
    auto = os.cpu_count() or 1
    n = requested if requested else (cap or auto)
    if cap:
        n = min(n, cap)
    return max(1, n)
