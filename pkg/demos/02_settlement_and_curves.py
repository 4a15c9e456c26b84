"""A threshold ladder, its implied exceedance curve, and settlement.

Several markets on one asset at ascending thresholds imply a survival
function over the transfer price. The curve must be non-increasing;
any inversion is free money, and the detector points at it.
"""

from toxmarket.exchange import Exchange, HIGHER, LOWER
from toxmarket.registry import Asset, AssetRegistry
from toxmarket.settlement import (
    detect_arbitrage,
    halt_at_cutoff,
    implied_curve,
    resolve_and_settle,
)

registry = AssetRegistry()
registry.add(
    Asset(
        asset_id="IE-0002",
        title="Retail unit, Kinsale",
        county="Cork",
        latitude=51.7059,
        longitude=-8.5222,
        book_value_cents=30_000_000,
        loan_reference="LN-2009-204",
    )
)
exchange = Exchange(registry, clock=lambda: 0.0)

CUTOFF = 100.0
ladder = [
    exchange.create_market("IE-0002", t, cutoff=CUTOFF)
    for t in (20_000_000, 25_000_000, 30_000_000)
]

alice = exchange.open_account("alice")
# Alice believes the transfer price lands near EUR 240,000: the price
# clears the low threshold, probably not the upper two.
exchange.execute_trade("alice", ladder[0].market_id, HIGHER, 30_000)
exchange.execute_trade("alice", ladder[1].market_id, LOWER, 10_000)
exchange.execute_trade("alice", ladder[2].market_id, LOWER, 30_000)

curve = implied_curve(exchange, "IE-0002")
for point in curve.points:
    print(f"P(price > {point.threshold_cents//100:,}) = {point.p_higher:.3f}")
print("violations at eps=0.02:", detect_arbitrage(curve, 0.02))

# Force an inversion to see the detector fire: someone dumps money on
# HIGHER at the top threshold.
bob = exchange.open_account("bob")
exchange.execute_trade("bob", ladder[2].market_id, HIGHER, 80_000)
curve = implied_curve(exchange, "IE-0002")
print("after bob's splurge:", [round(p.p_higher, 3) for p in curve.points])
print("violations now:", detect_arbitrage(curve, 0.02))

# Cutoff passes, the agency announces EUR 235,000, markets settle.
for market in ladder:
    halt_at_cutoff(market, CUTOFF)
for market in ladder:
    payouts = resolve_and_settle(exchange, market.market_id, 23_500_000)
    print(
        f"market at {market.threshold_cents//100:,}:",
        [(p.account_id, p.payout_cents) for p in payouts],
    )

credits, identity = exchange.ledger_identity()
print("ledger conserved:", credits == identity)
