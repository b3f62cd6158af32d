# app/utils/helpers/convergence.py
from typing import List, Optional, Sequence

import numpy as np


def observed_order(steps: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(step)."""
    steps, errors = np.asarray(steps, dtype=float), np.asarray(errors, dtype=float)
    if steps.size < 2 or np.any(steps <= 0.0) or np.any(errors <= 0.0):
        raise ValueError("an order fit needs at least two positive (step, error) pairs")
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)


def pairwise_orders(steps: Sequence[float], errors: Sequence[float]) -> List[Optional[float]]:
    """Order between each level and the previous one; None for the first level."""
    orders: List[Optional[float]] = [None]
    for k in range(1, len(steps)):
        if errors[k] > 0.0 and errors[k - 1] > 0.0:
            orders.append(float(np.log(errors[k - 1] / errors[k]) / np.log(steps[k - 1] / steps[k])))
        else:
            orders.append(None)
    return orders
