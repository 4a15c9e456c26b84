"""Logarithmic market scoring rule: the automated market maker.

Cost function C(q) = b*ln(sum_j exp(q_j/b)) over outstanding share
quantities q. Instantaneous prices are the softmax of q/b; the charge for
a trade is the cost difference, so any trade path between two states
costs the same (path independence) and the maker's worst-case subsidy on
a k-outcome market is b*ln(k).

Everything here is real-valued euro; cent rounding is the ledger's job.
The buy/invert pair is written so that ``quote_buy(shares_for_spend(s)) == s``
to machine precision: both reduce to log1p/expm1 forms sharing the same p_i.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import ArgumentError

# beyond this, exp(x) dominates 1 at double precision and we switch to the
# asymptotic forms that never overflow
_EXP_SWITCH = 34.0


def _validate_b(b: float) -> None:
    if not (isinstance(b, (int, float)) and math.isfinite(b) and b > 0.0):
        raise ArgumentError(f"liquidity parameter b must be finite and > 0, got {b!r}")


def _validate_q(q: Sequence[float]) -> None:
    if len(q) < 2:
        raise ArgumentError("need at least two outcomes")
    for v in q:
        if not math.isfinite(v):
            raise ArgumentError(f"non-finite quantity {v!r}")


def log_sum_exp_scaled(q: Sequence[float], b: float) -> float:
    """ln(sum_j exp(q_j/b)) with max-subtraction for overflow safety."""
    scaled = [v / b for v in q]
    m = max(scaled)
    return m + math.log(math.fsum(math.exp(z - m) for z in scaled))


def cost(q: Sequence[float], b: float) -> float:
    """C(q) = b*ln(sum_j exp(q_j/b)), in euro."""
    _validate_b(b)
    _validate_q(q)
    return b * log_sum_exp_scaled(q, b)


def prices(q: Sequence[float], b: float) -> tuple[float, ...]:
    """Per-outcome probabilities: softmax of q/b. Sum to 1 within 1e-12."""
    _validate_b(b)
    _validate_q(q)
    scaled = [v / b for v in q]
    m = max(scaled)
    exps = [math.exp(z - m) for z in scaled]
    denom = math.fsum(exps)
    return tuple(e / denom for e in exps)


def _log1p_p_expm1(p: float, x: float) -> float:
    """ln(1 + p*(e^x - 1)) for p in (0, 1], x >= 0, stable for any x."""
    if x <= _EXP_SWITCH:
        return math.log1p(p * math.expm1(x))
    # 1 + p*(e^x - 1) = p*e^x * (1 + (1-p)*e^-x/p)
    return math.log(p) + x + math.log1p((1.0 - p) * math.exp(-x) / p)


def _inv_log1p_p_expm1(p: float, y: float) -> float:
    """x such that ln(1 + p*(e^x - 1)) = y, for p in (0, 1], y >= 0."""
    if y <= _EXP_SWITCH:
        u = math.expm1(y) / p
        if math.isfinite(u):
            return math.log1p(u)
    # e^x = (e^y - 1 + p)/p = e^y*(1 + (p-1)*e^-y)/p
    return y + math.log1p((p - 1.0) * math.exp(-y)) - math.log(p)


def quote_buy(q: Sequence[float], b: float, outcome: int, shares: float) -> float:
    """Charge in euro for buying ``shares`` of outcome ``outcome`` at state q.

    Equals C(q + shares*e_i) - C(q); always positive and strictly less than
    ``shares`` (a winning share pays 1 euro and the price never reaches 1).
    """
    _validate_b(b)
    _validate_q(q)
    if not (math.isfinite(shares) and shares > 0.0):
        raise ArgumentError(f"shares must be finite and > 0, got {shares!r}")
    p = prices(q, b)[outcome]
    return b * _log1p_p_expm1(p, shares / b)


def shares_for_spend(q: Sequence[float], b: float, outcome: int, spend: float) -> float:
    """Shares of ``outcome`` that a spend of ``spend`` euro buys at state q.

    Exact inverse of :func:`quote_buy` at the same state.
    """
    _validate_b(b)
    _validate_q(q)
    if not (math.isfinite(spend) and spend > 0.0):
        raise ArgumentError(f"spend must be finite and > 0, got {spend!r}")
    p = prices(q, b)[outcome]
    return b * _inv_log1p_p_expm1(p, spend / b)


def max_subsidy(n_outcomes: int, b: float) -> float:
    """Worst-case maker loss b*ln(k) in euro for a k-outcome market."""
    _validate_b(b)
    if n_outcomes < 2:
        raise ArgumentError("need at least two outcomes")
    return b * math.log(n_outcomes)
