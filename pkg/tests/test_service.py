"""Service facade: endpoints, auth, idempotency, journal replay."""

import json
import threading

import pytest
from fastapi.testclient import TestClient

from toxmarket.config import ServiceConfig
from toxmarket.errors import JournalCorruptError
from toxmarket.journal import read_events
from toxmarket.service import build_state, create_app, ingest_into_state

ASSET_CSV = (
    "asset_id,title,county,latitude,longitude,book_value_cents,loan_reference\n"
    "IE-0001,Unfinished development,Cork,51.6809,-9.4532,45000000,LN-1\n"
    "IE-0002,Retail unit,Cork,51.6890,-9.4530,12000000,LN-2\n"
    "IE-0003,Office block,Dublin,53.3498,-6.2603,90000000,LN-3\n"
)

ADMIN = {"Authorization": "Bearer test-admin"}


@pytest.fixture
def config(tmp_path):
    return ServiceConfig(
        journal_path=str(tmp_path / "journal.jsonl"),
        admin_token="test-admin",
        token_ttl_seconds=1_000.0,
    )


@pytest.fixture
def clockbox():
    return [1_000.0]


@pytest.fixture
def client(config, clockbox):
    app = create_app(config, clock=lambda: clockbox[0])
    with TestClient(app) as c:
        c.app_state = app.state.toxmarket
        yield c


def seed_assets(client):
    ingest_into_state(client.app_state, ASSET_CSV)


def open_account(client, account_id="alice"):
    resp = client.post("/accounts", json={"account_id": account_id}, headers=ADMIN)
    assert resp.status_code == 201
    body = resp.json()
    return body["account_id"], {"Authorization": f"Bearer {body['token']}"}


def open_market(client, asset_id="IE-0001", threshold=25_000_000, cutoff=2_000.0):
    resp = client.post(
        "/admin/markets",
        json={
            "kind": "binary",
            "asset_id": asset_id,
            "threshold_cents": threshold,
            "b": 100.0,
            "cutoff": cutoff,
        },
        headers=ADMIN,
    )
    assert resp.status_code == 201, resp.text
    return resp.json()["market_id"]


class TestAssets:
    def test_list_and_nearby_match_registry(self, client):
        seed_assets(client)
        assert len(client.get("/assets").json()["assets"]) == 3
        resp = client.get(
            "/assets/nearby", params={"lat": 51.6809, "lon": -9.4532, "radius_km": 5}
        )
        ids = [a["asset_id"] for a in resp.json()["assets"]]
        assert ids == ["IE-0001", "IE-0002"]

    def test_nearby_validates_coordinates(self, client):
        resp = client.get(
            "/assets/nearby", params={"lat": 95.0, "lon": 0.0, "radius_km": 5}
        )
        assert resp.status_code == 400


class TestMarketsAndTrades:
    def test_fresh_market_prices_half(self, client):
        seed_assets(client)
        market_id = open_market(client)
        body = client.get(f"/markets/{market_id}").json()
        assert body["prices"] == {"HIGHER": 0.5, "LOWER": 0.5}
        assert body["state"] == "OPEN"
        assert body["threshold_cents"] == 25_000_000

    def test_unknown_market_404(self, client):
        assert client.get("/markets/m-999999").status_code == 404

    def test_trade_roundtrip(self, client):
        seed_assets(client)
        market_id = open_market(client)
        _, auth = open_account(client)
        resp = client.post(
            f"/markets/{market_id}/trades",
            json={"outcome": "HIGHER", "spend_cents": 513, "idempotency_key": "k1"},
            headers=auth,
        )
        assert resp.status_code == 200, resp.text
        body = resp.json()
        assert body["shares"] == pytest.approx(10.009623111337905, abs=1e-6)
        assert body["prices_after"][0] > 0.5
        assert body["remaining_cap_cents"] == 100_000 - 513

    def test_trade_requires_auth(self, client):
        seed_assets(client)
        market_id = open_market(client)
        resp = client.post(
            f"/markets/{market_id}/trades",
            json={"outcome": "HIGHER", "spend_cents": 100},
        )
        assert resp.status_code == 401

    def test_expired_token_rejected(self, client, clockbox):
        seed_assets(client)
        market_id = open_market(client, cutoff=1e9)
        _, auth = open_account(client)
        clockbox[0] += 2_000.0  # past token ttl
        resp = client.post(
            f"/markets/{market_id}/trades",
            json={"outcome": "HIGHER", "spend_cents": 100},
            headers=auth,
        )
        assert resp.status_code == 401

    def test_cap_conflict_reports_remaining_allowance(self, client):
        seed_assets(client)
        market_id = open_market(client)
        _, auth = open_account(client)
        client.post(
            f"/markets/{market_id}/trades",
            json={"outcome": "HIGHER", "spend_cents": 99_500},
            headers=auth,
        )
        resp = client.post(
            f"/markets/{market_id}/trades",
            json={"outcome": "HIGHER", "spend_cents": 1_000},
            headers=auth,
        )
        assert resp.status_code == 409
        assert resp.json()["remaining_cap_cents"] == 500

    def test_trade_past_cutoff_conflict(self, client, clockbox):
        seed_assets(client)
        market_id = open_market(client, cutoff=1_500.0)
        _, auth = open_account(client)
        clockbox[0] = 1_500.0
        resp = client.post(
            f"/markets/{market_id}/trades",
            json={"outcome": "HIGHER", "spend_cents": 100},
            headers=auth,
        )
        assert resp.status_code == 409
        assert client.get(f"/markets/{market_id}").json()["state"] == "HALTED"

    def test_invalid_body_maps_to_400(self, client):
        seed_assets(client)
        market_id = open_market(client)
        _, auth = open_account(client)
        resp = client.post(
            f"/markets/{market_id}/trades",
            json={"outcome": "HIGHER", "spend_cents": "lots"},
            headers=auth,
        )
        assert resp.status_code == 400

    def test_idempotent_trade_does_not_double_spend(self, client):
        seed_assets(client)
        market_id = open_market(client)
        account_id, auth = open_account(client)
        payload = {"outcome": "HIGHER", "spend_cents": 513, "idempotency_key": "once"}
        first = client.post(f"/markets/{market_id}/trades", json=payload, headers=auth)
        second = client.post(f"/markets/{market_id}/trades", json=payload, headers=auth)
        assert first.json() == second.json()
        account = client.get(f"/accounts/{account_id}", headers=auth).json()
        assert account["balance_cents"] == 1_000_000 - 513
        assert account["wagered_cents"][market_id] == 513

    def test_quote_matches_subsequent_trade(self, client):
        seed_assets(client)
        market_id = open_market(client)
        _, auth = open_account(client)
        quote = client.get(
            f"/markets/{market_id}/quote",
            params={"outcome": "HIGHER", "spend_cents": 513},
            headers=auth,
        ).json()
        assert quote["remaining_cap_cents"] == 100_000
        trade = client.post(
            f"/markets/{market_id}/trades",
            json={"outcome": "HIGHER", "spend_cents": 513},
            headers=auth,
        ).json()
        assert trade["shares"] == pytest.approx(quote["shares"], abs=1e-12)
        assert trade["prices_after"][0] == pytest.approx(
            quote["prices_after"]["HIGHER"], abs=1e-12
        )

    def test_concurrent_trades_serialize(self, client):
        seed_assets(client)
        market_id = open_market(client)
        _, auth_a = open_account(client, "alice")
        _, auth_b = open_account(client, "bob")

        results = {}

        def fire(name, auth, spend):
            results[name] = client.post(
                f"/markets/{market_id}/trades",
                json={"outcome": "HIGHER", "spend_cents": spend},
                headers=auth,
            )

        t1 = threading.Thread(target=fire, args=("a", auth_a, 40_000))
        t2 = threading.Thread(target=fire, args=("b", auth_b, 70_000))
        t1.start(); t2.start(); t1.join(); t2.join()
        assert results["a"].status_code == 200
        assert results["b"].status_code == 200

        # final q must equal one of the two serializations
        from toxmarket import lmsr

        def replay(order):
            q = [0.0, 0.0]
            for spend in order:
                q[0] += lmsr.shares_for_spend(q, 100.0, 0, spend / 100.0)
            return q[0]

        final_q = client.app_state.exchange.market(market_id).q[0]
        assert final_q in (replay([40_000, 70_000]), replay([70_000, 40_000]))


class TestAccounts:
    def test_open_requires_admin(self, client):
        resp = client.post("/accounts", json={})
        assert resp.status_code == 401

    def test_credit_and_view(self, client):
        account_id, auth = open_account(client)
        resp = client.post(
            f"/accounts/{account_id}/credit",
            json={"amount_cents": 250_000},
            headers=ADMIN,
        )
        assert resp.json()["balance_cents"] == 1_250_000
        body = client.get(f"/accounts/{account_id}", headers=auth).json()
        assert body["balance_cents"] == 1_250_000
        assert body["wager_cap_cents"] == 100_000

    def test_account_view_denied_to_other_token(self, client):
        account_id, _ = open_account(client, "alice")
        _, other = open_account(client, "bob")
        assert client.get(f"/accounts/{account_id}", headers=other).status_code == 401


class TestSettlementFlow:
    def test_settle_pays_and_shows_resolution(self, client, clockbox):
        seed_assets(client)
        market_id = open_market(client, cutoff=1_500.0)
        account_id, auth = open_account(client)
        trade = client.post(
            f"/markets/{market_id}/trades",
            json={"outcome": "HIGHER", "spend_cents": 513},
            headers=auth,
        ).json()
        clockbox[0] = 1_600.0
        resp = client.post(
            "/admin/settle",
            json={"market_id": market_id, "announced_price_cents": 26_000_000},
            headers=ADMIN,
        )
        body = resp.json()
        assert body["winning_outcome"] == "HIGHER"
        assert body["payouts"] == [
            {"account_id": account_id, "payout_cents": round(trade["shares"] * 100)}
        ]
        market = client.get(f"/markets/{market_id}").json()
        assert market["state"] == "SETTLED"
        assert market["resolution"]["winning_outcome"] == "HIGHER"
        account = client.get(f"/accounts/{account_id}", headers=auth).json()
        assert account["payouts"][0]["market_id"] == market_id

    def test_settle_before_cutoff_conflict(self, client):
        seed_assets(client)
        market_id = open_market(client, cutoff=2_000.0)
        resp = client.post(
            "/admin/settle",
            json={"market_id": market_id, "announced_price_cents": 26_000_000},
            headers=ADMIN,
        )
        assert resp.status_code == 409

    def test_joint_cascades_on_second_base_settlement(self, client, clockbox):
        seed_assets(client)
        m_a = open_market(client, "IE-0001", 20_000_000, cutoff=1_500.0)
        m_b = open_market(client, "IE-0002", 30_000_000, cutoff=1_500.0)
        resp = client.post(
            "/admin/markets",
            json={"kind": "joint", "market_a": m_a, "market_b": m_b},
            headers=ADMIN,
        )
        joint_id = resp.json()["joint_id"]
        _, auth = open_account(client)
        client.post(
            f"/markets/{joint_id}/trades",
            json={"outcome": "HL", "spend_cents": 400},
            headers=auth,
        )
        clockbox[0] = 1_600.0
        client.post(
            "/admin/settle",
            json={"market_id": m_a, "announced_price_cents": 25_000_000},
            headers=ADMIN,
        )
        second = client.post(
            "/admin/settle",
            json={"market_id": m_b, "announced_price_cents": 25_000_000},
            headers=ADMIN,
        ).json()
        assert second["settled_joint_markets"] == [joint_id]
        joints = client.get("/joint-markets").json()["joint_markets"]
        assert joints[0]["state"] == "SETTLED"


class TestCurveEndpoint:
    def test_curve_lists_thresholds_ascending(self, client):
        seed_assets(client)
        open_market(client, "IE-0001", 30_000_000)
        open_market(client, "IE-0001", 20_000_000)
        body = client.get("/assets/IE-0001/curve").json()
        assert [p["threshold_cents"] for p in body["points"]] == [20_000_000, 30_000_000]

    def test_curve_404_when_no_markets(self, client):
        seed_assets(client)
        assert client.get("/assets/IE-0001/curve").status_code == 404


class TestGuidelines:
    def test_default_document_served(self, client):
        resp = client.get("/docs/guidelines")
        assert resp.status_code == 200
        assert "guidelines" in resp.text.lower()

    def test_configured_file_served(self, tmp_path, clockbox):
        doc = tmp_path / "guidelines.txt"
        doc.write_text("official valuation methodology v2\n")
        config = ServiceConfig(
            journal_path=str(tmp_path / "j.jsonl"),
            admin_token="test-admin",
            guidelines_path=str(doc),
        )
        with TestClient(create_app(config, clock=lambda: clockbox[0])) as c:
            assert "methodology v2" in c.get("/docs/guidelines").text


class TestFuzzedPayloads:
    def test_invalid_payloads_cause_zero_ledger_drift(self, client):
        """No endpoint bypasses module preconditions: garbage in, 4xx out,
        and the ledger identity is untouched."""
        import random

        seed_assets(client)
        market_id = open_market(client)
        account_id, auth = open_account(client)
        client.post(
            f"/markets/{market_id}/trades",
            json={"outcome": "HIGHER", "spend_cents": 513},
            headers=auth,
        )
        state = client.app_state
        baseline = (
            state.exchange.ledger_identity(),
            list(state.exchange.market(market_id).q),
            state.exchange.account(account_id).balance_cents,
        )

        rng = random.Random(5)
        garbage_bodies = [
            {},
            {"outcome": "SIDEWAYS", "spend_cents": 100},
            {"outcome": "HIGHER", "spend_cents": -5},
            {"outcome": "HIGHER", "spend_cents": 0},
            {"outcome": "HIGHER", "spend_cents": 10**12},  # insufficient balance
            {"outcome": "HIGHER", "spend_cents": "all of it"},
            {"spend_cents": 100},
            {"outcome": None, "spend_cents": None},
            {"amount_cents": -1},
            {"kind": "exotic"},
            {"market_id": "m-404", "announced_price_cents": 1},
            {"market_id": market_id, "announced_price_cents": -7},
        ]
        targets = [
            ("POST", f"/markets/{market_id}/trades", auth),
            ("POST", f"/markets/m-404/trades", auth),
            ("POST", f"/accounts/{account_id}/credit", ADMIN),
            ("POST", "/admin/markets", ADMIN),
            ("POST", "/admin/settle", ADMIN),
        ]
        for _ in range(120):
            method, path, headers = rng.choice(targets)
            body = rng.choice(garbage_bodies)
            resp = client.request(method, path, json=body, headers=headers)
            assert 400 <= resp.status_code < 500, (path, body, resp.status_code)

        assert (
            state.exchange.ledger_identity(),
            list(state.exchange.market(market_id).q),
            state.exchange.account(account_id).balance_cents,
        ) == baseline
        state.exchange.check_conservation()


class TestJournalRecovery:
    def test_restart_reproduces_state(self, config, clockbox):
        app = create_app(config, clock=lambda: clockbox[0])
        with TestClient(app) as client:
            client.app_state = app.state.toxmarket
            seed_assets(client)
            market_id = open_market(client)
            _, auth = open_account(client, "alice")
            for spend in (513, 700, 101):
                client.post(
                    f"/markets/{market_id}/trades",
                    json={"outcome": "HIGHER", "spend_cents": spend},
                    headers=auth,
                )
            live = app.state.toxmarket

            reborn = build_state(config, clock=lambda: clockbox[0])
            assert reborn.exchange.market(market_id).q == live.exchange.market(market_id).q
            assert (
                reborn.exchange.account("alice").balance_cents
                == live.exchange.account("alice").balance_cents
            )
            assert reborn.exchange.market(market_id).prices() == live.exchange.market(
                market_id
            ).prices()
            assert reborn.sessions.keys() == live.sessions.keys()
            assert reborn.idempotency == live.idempotency

    def test_corrupt_journal_refuses_with_offset(self, config, clockbox):
        good = json.dumps({"type": "account_opened", "account_id": "a", "token": "t",
                           "issued_at": 0.0, "expires_at": 1e9}) + "\n"
        with open(config.journal_path, "w") as fh:
            fh.write(good)
            fh.write("{not json\n")
        with pytest.raises(JournalCorruptError) as err:
            build_state(config, clock=lambda: clockbox[0])
        assert err.value.offset == len(good.encode())

    def test_journal_is_append_only_jsonl(self, client, config):
        seed_assets(client)
        open_market(client)
        events = list(read_events(config.journal_path))
        assert [e["type"] for e in events[:3]] == ["asset_added"] * 3
        assert events[3]["type"] == "market_created"
