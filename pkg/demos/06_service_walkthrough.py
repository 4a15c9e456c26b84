"""Drive the HTTP facade end to end, then prove crash recovery.

Uses the in-process test client so the walkthrough runs anywhere; the
same calls work against `toxmarket serve` over the wire.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from toxmarket.config import ServiceConfig
from toxmarket.service import build_state, create_app, ingest_into_state

workdir = Path(tempfile.mkdtemp(prefix="toxmarket-demo-"))
config = ServiceConfig(journal_path=str(workdir / "journal.jsonl"), admin_token="demo-admin")
ADMIN = {"Authorization": "Bearer demo-admin"}

app = create_app(config)
client = TestClient(app)
state = app.state.toxmarket

ingest_into_state(
    state,
    "asset_id,title,county,latitude,longitude,book_value_cents,loan_reference\n"
    "IE-0001,Unfinished development,Cork,51.6809,-9.4532,45000000,LN-1\n",
)
print("assets:", [a["asset_id"] for a in client.get("/assets").json()["assets"]])

market = client.post(
    "/admin/markets",
    json={"kind": "binary", "asset_id": "IE-0001", "threshold_cents": 25_000_000,
          "b": 100.0, "cutoff": 4e12},
    headers=ADMIN,
).json()
print("market:", market["market_id"], market["prices"])

opened = client.post("/accounts", json={"account_id": "alice"}, headers=ADMIN).json()
AUTH = {"Authorization": f"Bearer {opened['token']}"}
print("alice balance:", opened["balance_cents"], "cents")

quote = client.get(
    f"/markets/{market['market_id']}/quote",
    params={"outcome": "HIGHER", "spend_cents": 513},
    headers=AUTH,
).json()
print(f"quote: EUR 5.13 buys {quote['shares']:.4f} HIGHER shares")

trade = client.post(
    f"/markets/{market['market_id']}/trades",
    json={"outcome": "HIGHER", "spend_cents": 513, "idempotency_key": "demo-1"},
    headers=AUTH,
).json()
print("executed:", trade["trade_id"], f"{trade['shares']:.4f} shares,",
      "new HIGHER price", round(trade["prices_after"][0], 4))

# retry with the same idempotency key: no double spend
retry = client.post(
    f"/markets/{market['market_id']}/trades",
    json={"outcome": "HIGHER", "spend_cents": 513, "idempotency_key": "demo-1"},
    headers=AUTH,
).json()
print("idempotent retry returned the same trade:", retry["trade_id"] == trade["trade_id"])

# kill the process (drop the state) and replay the journal
reborn = build_state(config)
print(
    "replayed balance matches:",
    reborn.exchange.account("alice").balance_cents
    == client.get("/accounts/alice", headers=AUTH).json()["balance_cents"],
)
print(
    "replayed prices match:",
    reborn.exchange.market(market["market_id"]).prices()
    == tuple(client.get(f"/markets/{market['market_id']}").json()["prices"].values()),
)
