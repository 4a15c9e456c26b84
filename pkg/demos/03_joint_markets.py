"""Joint markets expose dependency structure between neighboring assets.

Two adjacent sites may be worth more together (shared road access) or
less (substitutes competing for the same buyer). A market over the
product outcome space prices all four corners; the lift of the joint
HH price over the product of marginals reads out the dependency.
"""

from toxmarket.combinatorial import (
    JointBook,
    dependency_report,
    joint_prices,
    marginal,
    propose_pairs,
)
from toxmarket.exchange import Exchange, HIGHER
from toxmarket.registry import Asset, AssetRegistry

registry = AssetRegistry()
for asset_id, lat, lon in [
    ("BAN-1", 51.680, -9.453),   # two Bantry sites a street apart
    ("BAN-2", 51.684, -9.450),
    ("DUB-1", 53.3498, -6.2603),  # and one far away in Dublin
]:
    registry.add(
        Asset(
            asset_id=asset_id,
            title=f"Site {asset_id}",
            county="Cork" if asset_id.startswith("BAN") else "Dublin",
            latitude=lat,
            longitude=lon,
            book_value_cents=20_000_000,
            loan_reference=f"LN-{asset_id}",
        )
    )

exchange = Exchange(registry, clock=lambda: 0.0)
book = JointBook(exchange)

bases = {a: exchange.create_market(a, 25_000_000, cutoff=1e9) for a in registry.assets}

# The proximity heuristic proposes which joint markets to open.
pairs = propose_pairs(registry, exchange, radius_km=5.0, max_pairs=10, book=book)
print("proposed pairs within 5 km:", [(a, b, round(d, 2)) for a, b, d in pairs])

a, b, _ = pairs[0]
joint = book.create_joint_market(bases[a].market_id, bases[b].market_id)
print("fresh joint prices (HH, HL, LH, LL):", joint_prices(joint))

# Traders who think the sites rise or fall together buy the diagonal.
trader = exchange.open_account("trader")
exchange.execute_trade("trader", joint.joint_id, "HH", 2_000)
exchange.execute_trade("trader", joint.joint_id, "LL", 2_000)

print("prices after diagonal buying:", [round(p, 3) for p in joint_prices(joint)])
print("marginal P(a HIGHER):", round(marginal(joint, "a", HIGHER), 3))
report = dependency_report(joint)
print(f"lift = {report.lift:.3f} -> {report.classification}")
