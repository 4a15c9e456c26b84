"""Open a market on an impaired asset and trade against the maker.

Walks the core loop: register an asset, open a higher/lower market at a
threshold, quote, spend-driven buys, and watch prices respond.
"""

from toxmarket.exchange import Exchange, ExchangeConfig, HIGHER, LOWER
from toxmarket.registry import Asset, AssetRegistry

registry = AssetRegistry()
registry.add(
    Asset(
        asset_id="IE-0001",
        title="Unfinished residential development, Bantry",
        county="Cork",
        latitude=51.6809,
        longitude=-9.4532,
        book_value_cents=45_000_000,   # EUR 450,000 on the bank's books
        loan_reference="LN-2009-118",
    )
)

exchange = Exchange(registry, ExchangeConfig(default_b=100.0), clock=lambda: 0.0)

# A binary security: does the transfer price beat EUR 250,000?
market = exchange.create_market("IE-0001", threshold_cents=25_000_000, cutoff=1e9)
print("fresh market prices:", market.prices())          # (0.5, 0.5)

alice = exchange.open_account("alice")
print("alice starts with", alice.balance_cents, "cents of scrip")

# Spend-driven trading: name the spend, receive the shares it buys.
trade = exchange.execute_trade("alice", market.market_id, HIGHER, spend_cents=513)
print(f"EUR 5.13 on HIGHER bought {trade.shares:.6f} shares")
print("prices after:", trade.prices_after)

# A bigger opposing wager pulls the price back the other way.
bob = exchange.open_account("bob")
exchange.execute_trade("bob", market.market_id, LOWER, spend_cents=5_000)
print("prices after bob's EUR 50 on LOWER:", market.prices())

# Share-driven quoting exists for display; cost is always below the
# share count because a winning share pays exactly EUR 1.
cost = exchange.quote_buy(market.market_id, HIGHER, 10.0)
print(f"quote for 10 HIGHER shares: EUR {cost:.5f}")

# The ledger conserves to the cent at all times.
credits, identity = exchange.ledger_identity()
print("credits issued:", credits, "== balances + maker take - payouts:", identity)
