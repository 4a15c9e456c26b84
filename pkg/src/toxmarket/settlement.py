"""Halting, resolution, payouts, and exceedance-curve auditing.

A market halts when its cutoff passes; once the transfer price is
announced the market resolves: HIGHER wins iff the announced price is
strictly above the threshold (a tie settles LOWER — the contract language
is strictly comparative, and the rule is published so traders price it
in). Each winning share pays exactly 100 cents; fractional share payouts
round half-even per account per market, which is unbiased across many
settlements.

The per-threshold HIGHER prices on one asset form its implied exceedance
curve; a survival function must be non-increasing, and any adjacent
increase beyond epsilon is a risk-free arbitrage (buy HIGHER at the lower
threshold, LOWER at the upper: cost < 1 - epsilon for a payoff >= 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import (
    AlreadySettledError,
    ArgumentError,
    NotFoundError,
    StateConflictError,
)
from .exchange import Exchange, HIGHER, LOWER, Market, MarketState
from .registry import AssetStatus


@dataclass(frozen=True)
class Resolution:
    market_id: str
    announced_price_cents: Optional[int]
    winning_outcome: str
    resolved_at: float


@dataclass(frozen=True)
class Payout:
    account_id: str
    payout_cents: int


@dataclass(frozen=True)
class SettlementRow:
    """One exportable settlement-report line."""

    market_id: str
    account_id: str
    outcome: str
    shares: float
    payout_cents: int


@dataclass(frozen=True)
class CurvePoint:
    threshold_cents: int
    p_higher: float


@dataclass(frozen=True)
class ImpliedCurve:
    asset_id: str
    points: tuple[CurvePoint, ...]


def winning_outcome(threshold_cents: int, announced_price_cents: int) -> str:
    """HIGHER iff the announced price strictly exceeds the threshold."""
    return HIGHER if announced_price_cents > threshold_cents else LOWER


def payout_cents_for(shares: float) -> int:
    """100 cents per share, fractional part rounded half-even."""
    return int(round(shares * 100.0))


def halt_at_cutoff(market: Market, now: float) -> MarketState:
    """Halt the market if its cutoff has passed; idempotent, no-op before."""
    if market.state is MarketState.OPEN and now >= market.cutoff:
        market.state = MarketState.HALTED
    return market.state


def resolve_and_settle(
    exchange: Exchange,
    market_id: str,
    announced_price_cents: int,
    now: Optional[float] = None,
) -> list[Payout]:
    """Resolve a halted market against the announced transfer price.

    Pays every winning position, marks market and asset SETTLED, and
    records the resolution. At-most-once: a second call raises and
    changes nothing.
    """
    market = exchange.market(market_id)
    if market.state is MarketState.SETTLED:
        raise AlreadySettledError(f"market {market_id} already settled")
    if market.state is not MarketState.HALTED:
        raise StateConflictError(f"market {market_id} must be halted before settlement")
    if not isinstance(announced_price_cents, int) or announced_price_cents <= 0:
        raise ArgumentError(f"announced price must be a positive integer, got {announced_price_cents!r}")
    if market.threshold_cents is None:
        raise ArgumentError(f"market {market_id} has no threshold; settle via its base events")
    winner = winning_outcome(market.threshold_cents, announced_price_cents)
    now = exchange.clock() if now is None else now
    payouts = _pay_winners(exchange, market, winner)
    exchange.resolutions[market_id] = Resolution(
        market_id=market_id,
        announced_price_cents=announced_price_cents,
        winning_outcome=winner,
        resolved_at=now,
    )
    if market.asset_id is not None:
        exchange.registry.get(market.asset_id).status = AssetStatus.SETTLED
    return payouts


def _pay_winners(exchange: Exchange, market: Market, winner: str) -> list[Payout]:
    """Credit 100 cents per winning share and mark the market SETTLED.

    Shared by binary settlement here and joint settlement in
    :mod:`toxmarket.combinatorial`.
    """
    market.outcome_index(winner)
    payouts: list[Payout] = []
    for account_id in sorted(exchange.accounts):
        account = exchange.accounts[account_id]
        shares = account.position(market.market_id, winner)
        if shares <= 0.0:
            continue
        amount = payout_cents_for(shares)
        account.balance_cents += amount
        exchange.total_payout_cents += amount
        payouts.append(Payout(account_id=account_id, payout_cents=amount))
        exchange.settlement_rows.append(
            SettlementRow(
                market_id=market.market_id,
                account_id=account_id,
                outcome=winner,
                shares=shares,
                payout_cents=amount,
            )
        )
    market.state = MarketState.SETTLED
    return payouts


def resolution_of(exchange: Exchange, market_id: str) -> Optional[Resolution]:
    return exchange.resolutions.get(market_id)


def export_settlement_report(exchange: Exchange) -> str:
    lines = ["market_id,account_id,outcome,shares,payout_cents"]
    for row in exchange.settlement_rows:
        lines.append(
            f"{row.market_id},{row.account_id},{row.outcome},{row.shares!r},{row.payout_cents}"
        )
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Exceedance curves and arbitrage auditing
# ----------------------------------------------------------------------


def implied_curve(exchange: Exchange, asset_id: str) -> ImpliedCurve:
    """Per-threshold HIGHER prices for one asset, thresholds ascending.

    Uses OPEN and HALTED markets; thresholds must be distinct.
    """
    exchange.registry.get(asset_id)
    markets = [
        m
        for m in exchange.markets.values()
        if m.asset_id == asset_id and m.state in (MarketState.OPEN, MarketState.HALTED)
    ]
    if not markets:
        raise NotFoundError(f"no open or halted markets on asset {asset_id!r}")
    thresholds = [m.threshold_cents for m in markets]
    if len(set(thresholds)) != len(thresholds):
        raise ArgumentError(f"duplicate thresholds on asset {asset_id!r}")
    markets.sort(key=lambda m: m.threshold_cents)
    points = tuple(
        CurvePoint(threshold_cents=m.threshold_cents, p_higher=m.price_of(HIGHER))
        for m in markets
    )
    return ImpliedCurve(asset_id=asset_id, points=points)


def detect_arbitrage(curve: ImpliedCurve, epsilon: float) -> list[tuple[int, int]]:
    """Adjacent index pairs (i, i+1) where P(>t_{i+1}) > P(>t_i) + epsilon.

    An exceedance curve must be non-increasing; an empty list means the
    ladder is consistent to within epsilon.
    """
    if epsilon < 0.0:
        raise ArgumentError("epsilon must be >= 0")
    violations = []
    for i in range(len(curve.points) - 1):
        if curve.points[i + 1].p_higher > curve.points[i].p_higher + epsilon:
            violations.append((i, i + 1))
    return violations
