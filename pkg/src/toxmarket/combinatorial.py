"""Joint markets over pairs of base events, and the proximity heuristic.

A joint market prices the product outcome space of two base higher/lower
events: HH, HL, LH, LL, in that order. The same LMSR maker runs it with
k=4, so all pricing, path-independence, and bounded-loss properties carry
over with subsidy b*ln(4). The joint HH price against the product of the
marginals (lift) exposes dependency structure: lift above 1 means the
assets behave as complements, below 1 as substitutes.

Joint markets need no separate announcement — once both base markets have
resolved, the 4-way winner is determined and the joint settles through
the same payout machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ArgumentError, NotFoundError, StateConflictError
from .exchange import Exchange, HIGHER, Market, MarketState
from .registry import AssetRegistry, haversine_km
from .settlement import Payout, Resolution, _pay_winners
from . import lmsr

JOINT_OUTCOMES = ("HH", "HL", "LH", "LL")

COMPLEMENTS = "COMPLEMENTS"
SUBSTITUTES = "SUBSTITUTES"
INDEPENDENT = "INDEPENDENT"

DEFAULT_LIFT_EPSILON = 0.05


@dataclass
class JointMarket:
    joint_id: str
    event_a: str  # base market id
    event_b: str
    market: Market  # the 4-outcome exchange market holding q, b, state


@dataclass(frozen=True)
class DependencyReport:
    joint_id: str
    p_joint_hh: float
    p_marginal_a: float
    p_marginal_b: float
    lift: float
    classification: str


class JointBook:
    """All joint markets of one deployment, keyed by joint_id."""

    def __init__(self, exchange: Exchange):
        self.exchange = exchange
        self.joints: dict[str, JointMarket] = {}
        self._seq = 0

    def get(self, joint_id: str) -> JointMarket:
        try:
            return self.joints[joint_id]
        except KeyError:
            raise NotFoundError(f"unknown joint market {joint_id!r}") from None

    def create_joint_market(
        self,
        market_a_id: str,
        market_b_id: str,
        b: Optional[float] = None,
        joint_id: Optional[str] = None,
    ) -> JointMarket:
        """Open a 4-outcome market over two distinct open base markets.

        Cutoff is the earlier of the two base cutoffs: once either base
        event halts, the joint outcome can start leaking.
        """
        if market_a_id == market_b_id:
            raise ArgumentError("joint market needs two distinct base events")
        market_a = self.exchange.market(market_a_id)
        market_b = self.exchange.market(market_b_id)
        for base in (market_a, market_b):
            if base.state is not MarketState.OPEN:
                raise StateConflictError(
                    f"base market {base.market_id} is {base.state.value}, not OPEN"
                )
        b = self.exchange.config.default_b if b is None else b
        if not (isinstance(b, (int, float)) and b > 0):
            raise ArgumentError(f"liquidity parameter b must be > 0, got {b!r}")
        market = self.exchange._new_market(
            asset_id=None,
            threshold_cents=None,
            outcomes=JOINT_OUTCOMES,
            b=float(b),
            cutoff=min(market_a.cutoff, market_b.cutoff),
            market_id=joint_id,
        )
        joint = JointMarket(
            joint_id=market.market_id,
            event_a=market_a_id,
            event_b=market_b_id,
            market=market,
        )
        self.joints[joint.joint_id] = joint
        return joint

    def settle_joint(self, joint_id: str) -> list[Payout]:
        """Settle a joint market from its two base resolutions."""
        joint = self.get(joint_id)
        market = joint.market
        if market.state is MarketState.SETTLED:
            raise StateConflictError(f"joint market {joint_id} already settled")
        res_a = self.exchange.resolutions.get(joint.event_a)
        res_b = self.exchange.resolutions.get(joint.event_b)
        if res_a is None or res_b is None:
            raise StateConflictError(
                f"joint market {joint_id} needs both base markets resolved"
            )
        winner = _joint_winner(res_a, res_b)
        # pass through HALTED so the state machine stays OPEN -> HALTED -> SETTLED
        if market.state is MarketState.OPEN:
            market.state = MarketState.HALTED
        payouts = _pay_winners(self.exchange, market, winner)
        self.exchange.resolutions[joint_id] = Resolution(
            market_id=joint_id,
            announced_price_cents=None,
            winning_outcome=winner,
            resolved_at=max(res_a.resolved_at, res_b.resolved_at),
        )
        return payouts


def _joint_winner(res_a: Resolution, res_b: Resolution) -> str:
    a = "H" if res_a.winning_outcome == HIGHER else "L"
    b = "H" if res_b.winning_outcome == HIGHER else "L"
    return a + b


def joint_prices(joint: JointMarket) -> tuple[float, float, float, float]:
    """Probabilities for (HH, HL, LH, LL); sum to 1 within 1e-12."""
    return joint.market.prices()


def marginal(joint: JointMarket, event: str, outcome: str = HIGHER) -> float:
    """Marginal probability of one base event from the joint prices.

    ``event`` is "a" or "b". Marginals partition: HIGHER + LOWER = 1.
    """
    p_hh, p_hl, p_lh, p_ll = joint_prices(joint)
    if event == "a":
        p_high = p_hh + p_hl
    elif event == "b":
        p_high = p_hh + p_lh
    else:
        raise ArgumentError(f"event must be 'a' or 'b', got {event!r}")
    if outcome == HIGHER:
        return p_high
    return 1.0 - p_high


def dependency_report(
    joint: JointMarket, epsilon: float = DEFAULT_LIFT_EPSILON
) -> DependencyReport:
    """Lift of the joint HH outcome over independent marginals."""
    p = joint_prices(joint)
    p_a = p[0] + p[1]
    p_b = p[0] + p[2]
    lift = p[0] / (p_a * p_b)
    if lift > 1.0 + epsilon:
        classification = COMPLEMENTS
    elif lift < 1.0 - epsilon:
        classification = SUBSTITUTES
    else:
        classification = INDEPENDENT
    return DependencyReport(
        joint_id=joint.joint_id,
        p_joint_hh=p[0],
        p_marginal_a=p_a,
        p_marginal_b=p_b,
        lift=lift,
        classification=classification,
    )


def propose_pairs(
    registry: AssetRegistry,
    exchange: Exchange,
    radius_km: float,
    max_pairs: int,
    book: Optional[JointBook] = None,
) -> list[tuple[str, str, float]]:
    """Candidate asset pairs for new joint markets, by proximity.

    Considers assets that have at least one OPEN base market, pairs them
    when their great-circle distance is within ``radius_km``, drops pairs
    that already have a joint market, and returns (asset_a, asset_b,
    distance_km) sorted by distance then asset ids, truncated to
    ``max_pairs``. Output does not depend on registry insertion order.
    """
    if not (radius_km > 0.0):
        raise ArgumentError("radius_km must be > 0")
    if max_pairs < 1:
        raise ArgumentError("max_pairs must be >= 1")

    open_assets = sorted(
        {
            m.asset_id
            for m in exchange.markets.values()
            if m.asset_id is not None and m.state is MarketState.OPEN
        }
    )
    paired: set[tuple[str, str]] = set()
    if book is not None:
        for joint in book.joints.values():
            a = exchange.market(joint.event_a).asset_id
            b = exchange.market(joint.event_b).asset_id
            if a is not None and b is not None:
                paired.add((min(a, b), max(a, b)))

    candidates = []
    for i, asset_a in enumerate(open_assets):
        a = registry.get(asset_a)
        for asset_b in open_assets[i + 1 :]:
            if (asset_a, asset_b) in paired:
                continue
            bb = registry.get(asset_b)
            d = haversine_km(a.latitude, a.longitude, bb.latitude, bb.longitude)
            if d <= radius_km:
                candidates.append((asset_a, asset_b, d))
    candidates.sort(key=lambda t: (t[2], t[0], t[1]))
    return candidates[:max_pairs]


def joint_max_subsidy(b: float) -> float:
    return lmsr.max_subsidy(len(JOINT_OUTCOMES), b)
