from typing import List

from ..errors import InvalidArgumentError


def imbalanced_budgets(m: int, base: int) -> List[int]:
    """nᵢ = base·(m + 1 − i), largest budget first."""
    if m < 1 or base < 1:
        raise InvalidArgumentError(f"need m ≥ 1 and base ≥ 1, got m={m}, base={base}")
    return [base * (m + 1 - i) for i in range(1, m + 1)]
