"""Resource budgets.

Defaults can be overridden per process through ``FTHRESH_BUDGET_<FIELD>``
environment variables, e.g. ``FTHRESH_BUDGET_N_MAX=4``.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from .errors import InputError


@dataclass(frozen=True)
class Budget:
    n_max: int = 3
    e_max: int = 8
    denom_bound: int = 32
    sweep: int = 2
    sweep_levels: int = 8
    max_pairs: int = 20000
    max_degree: int = 4096
    exponent_cap: int = 1 << 20
    step_budget: int = 1 << 24
    frontier_cap: int = 200000

    @classmethod
    def from_env(cls, env=None, **overrides) -> "Budget":
        env = os.environ if env is None else env
        values = {}
        for field in dataclasses.fields(cls):
            raw = env.get(f"FTHRESH_BUDGET_{field.name.upper()}")
            if raw is not None and raw.strip():
                try:
                    values[field.name] = int(raw)
                except ValueError:
                    raise InputError(f"FTHRESH_BUDGET_{field.name.upper()} must be an integer") from None
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_BUDGET = Budget()
