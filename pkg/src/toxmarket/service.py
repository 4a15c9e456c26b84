"""HTTP/JSON facade binding the modules into a runnable system.

Handlers are thin adapters: validate input, call exactly one module
operation under the state lock, journal the event, respond. Domain
errors map onto protocol codes (400 invalid input, 401 auth, 404 unknown
entity, 409 state conflict, 422 rejected record).

Every mutation is described by a journal event carrying everything its
replay needs (identifiers the engine would otherwise mint
non-deterministically — session tokens, wall-clock timestamps — are
generated once, stored in the event, and reused on replay). Restarting a
service on the same journal therefore reproduces balances, positions,
and prices bit for bit.
"""

from __future__ import annotations

import os
import secrets
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from . import lmsr
from .combinatorial import JointBook, dependency_report
from .config import ServiceConfig
from .errors import (
    ArgumentError,
    AuthError,
    IngestError,
    NotFoundError,
    StateConflictError,
    ToxmarketError,
    WagerCapExceededError,
)
from .exchange import Exchange, ExchangeConfig, Market, MarketState
from .journal import Journal, read_events
from .registry import Asset, AssetRegistry, AssetStatus, IngestReport
from .settlement import halt_at_cutoff, resolve_and_settle

DEFAULT_GUIDELINES = (
    "Valuation guidelines document slot.\n"
    "Operators publish the authoritative pricing guidance here so market\n"
    "participants can study the acquirer's stated methodology.\n"
)


@dataclass
class ApiSession:
    token: str
    account_id: str
    issued_at: float
    expires_at: float


class AppState:
    """Everything one deployment owns, rebuilt from the journal on start."""

    def __init__(self, config: ServiceConfig, clock: Callable[[], float] = time.time):
        self.config = config
        self.clock = clock
        self.registry = AssetRegistry()
        self.exchange = Exchange(
            self.registry,
            ExchangeConfig(
                default_b=config.default_b,
                wager_cap_cents=config.wager_cap_cents,
                starting_balance_cents=config.starting_balance_cents,
            ),
            clock=clock,
        )
        self.book = JointBook(self.exchange)
        self.sessions: dict[str, ApiSession] = {}
        self.idempotency: dict[str, dict] = {}
        self.lock = threading.RLock()
        self.journal: Optional[Journal] = None

    # ------------------------------------------------------------------
    # Event application: the single state-transition function
    # ------------------------------------------------------------------

    def apply_event(self, event: dict) -> dict:
        kind = event["type"]
        if kind == "asset_added":
            record = dict(event["record"])
            record["status"] = AssetStatus(record.get("status", "REGISTERED"))
            asset = Asset(**record)
            self.registry.add(asset)
            body = {"asset_id": asset.asset_id}
        elif kind == "account_opened":
            account = self.exchange.open_account(event.get("account_id"))
            session = ApiSession(
                token=event["token"],
                account_id=account.account_id,
                issued_at=event["issued_at"],
                expires_at=event["expires_at"],
            )
            self.sessions[session.token] = session
            body = {
                "account_id": account.account_id,
                "token": session.token,
                "balance_cents": account.balance_cents,
                "expires_at": session.expires_at,
                "attested_over_18": bool(event.get("attested_over_18", False)),
            }
        elif kind == "account_credited":
            balance = self.exchange.credit(event["account_id"], event["amount_cents"])
            body = {"account_id": event["account_id"], "balance_cents": balance}
        elif kind == "market_created":
            market = self.exchange.create_market(
                event["asset_id"],
                event["threshold_cents"],
                b=event["b"],
                cutoff=event["cutoff"],
                now=event["now"],
            )
            body = self.market_payload(market, now=event["now"])
        elif kind == "joint_created":
            joint = self.book.create_joint_market(
                event["market_a"], event["market_b"], b=event["b"]
            )
            body = self.joint_payload(joint.joint_id)
        elif kind == "trade_executed":
            trade = self.exchange.execute_trade(
                event["account_id"],
                event["market_id"],
                event["outcome"],
                event["spend_cents"],
                now=event["now"],
            )
            body = {
                "trade_id": trade.trade_id,
                "account_id": trade.account_id,
                "market_id": trade.market_id,
                "outcome": trade.outcome,
                "shares": trade.shares,
                "cost_cents": trade.cost_cents,
                "timestamp": trade.timestamp,
                "prices_after": list(trade.prices_after),
                "remaining_cap_cents": self.exchange.remaining_cap_cents(
                    trade.account_id, trade.market_id
                ),
            }
        elif kind == "market_settled":
            market = self.exchange.market(event["market_id"])
            halt_at_cutoff(market, event["now"])
            payouts = resolve_and_settle(
                self.exchange,
                event["market_id"],
                event["announced_price_cents"],
                now=event["now"],
            )
            settled_joints = self._cascade_joints()
            body = {
                "market_id": event["market_id"],
                "winning_outcome": self.exchange.resolutions[event["market_id"]].winning_outcome,
                "payouts": [
                    {"account_id": p.account_id, "payout_cents": p.payout_cents}
                    for p in payouts
                ],
                "settled_joint_markets": settled_joints,
            }
        else:
            raise ArgumentError(f"unknown event type {kind!r}")

        key = event.get("idempotency_key")
        if key:
            self.idempotency[key] = body
        return body

    def _cascade_joints(self) -> list[str]:
        """Settle every joint whose base events have both resolved."""
        settled = []
        for joint in self.book.joints.values():
            if joint.market.state is MarketState.SETTLED:
                continue
            if joint.event_a in self.exchange.resolutions and joint.event_b in self.exchange.resolutions:
                self.book.settle_joint(joint.joint_id)
                settled.append(joint.joint_id)
        return settled

    def submit(self, event: dict, idempotency_key: Optional[str] = None) -> dict:
        """Apply an event and journal it before acknowledging."""
        with self.lock:
            if idempotency_key:
                cached = self.idempotency.get(idempotency_key)
                if cached is not None:
                    return cached
                event["idempotency_key"] = idempotency_key
            body = self.apply_event(event)
            if self.journal is not None:
                self.journal.append(event)
            return body

    # ------------------------------------------------------------------
    # Read-side payloads
    # ------------------------------------------------------------------

    def effective_state(self, market: Market, now: Optional[float] = None) -> str:
        # trading already rejects past-cutoff orders; the flag flip happens
        # at settlement, so views compute the halted state from the clock
        now = self.clock() if now is None else now
        if market.state is MarketState.OPEN and now >= market.cutoff:
            return MarketState.HALTED.value
        return market.state.value

    def market_payload(self, market: Market, now: Optional[float] = None) -> dict:
        prices = market.prices()
        body = {
            "market_id": market.market_id,
            "asset_id": market.asset_id,
            "threshold_cents": market.threshold_cents,
            "outcomes": list(market.outcomes),
            "prices": dict(zip(market.outcomes, prices)),
            "b": market.b,
            "state": self.effective_state(market, now),
            "cutoff": market.cutoff,
        }
        resolution = self.exchange.resolutions.get(market.market_id)
        if resolution is not None:
            body["resolution"] = {
                "announced_price_cents": resolution.announced_price_cents,
                "winning_outcome": resolution.winning_outcome,
                "resolved_at": resolution.resolved_at,
            }
        return body

    def joint_payload(self, joint_id: str) -> dict:
        joint = self.book.get(joint_id)
        body = self.market_payload(joint.market)
        report = dependency_report(joint)
        body.update(
            {
                "joint_id": joint.joint_id,
                "event_a": joint.event_a,
                "event_b": joint.event_b,
                "lift": report.lift,
                "classification": report.classification,
            }
        )
        return body

    def account_payload(self, account_id: str) -> dict:
        account = self.exchange.account(account_id)
        cap = self.config.wager_cap_cents
        return {
            "account_id": account.account_id,
            "balance_cents": account.balance_cents,
            "positions": {m: dict(v) for m, v in account.positions.items()},
            "wagered_cents": dict(account.wagered_cents),
            "wager_cap_cents": cap,
            "remaining_cap_cents": {
                m: cap - w for m, w in account.wagered_cents.items()
            },
            "payouts": [
                {
                    "market_id": row.market_id,
                    "outcome": row.outcome,
                    "shares": row.shares,
                    "payout_cents": row.payout_cents,
                }
                for row in self.exchange.settlement_rows
                if row.account_id == account_id
            ],
        }


def build_state(config: ServiceConfig, clock: Callable[[], float] = time.time) -> AppState:
    """Replay the journal (if any) into a fresh state and attach a writer."""
    state = AppState(config, clock=clock)
    if os.path.exists(config.journal_path):
        for event in read_events(config.journal_path):
            state.apply_event(event)
    state.journal = Journal(config.journal_path)
    return state


def asset_record(asset: Asset) -> dict:
    return {
        "asset_id": asset.asset_id,
        "title": asset.title,
        "county": asset.county,
        "latitude": asset.latitude,
        "longitude": asset.longitude,
        "book_value_cents": asset.book_value_cents,
        "loan_reference": asset.loan_reference,
        "status": asset.status.value,
    }


def ingest_into_state(state: AppState, text) -> IngestReport:
    """Journal-backed ingest: accepted records become asset_added events."""
    with state.lock:
        report = state.registry.ingest(text)
        if state.journal is not None:
            for asset_id in report.accepted_ids:
                state.journal.append(
                    {
                        "type": "asset_added",
                        "record": asset_record(state.registry.get(asset_id)),
                    }
                )
    return report


# ----------------------------------------------------------------------
# Request bodies
# ----------------------------------------------------------------------


class OpenAccountBody(BaseModel):
    account_id: Optional[str] = None
    attested_over_18: bool = False
    idempotency_key: Optional[str] = None


class CreditBody(BaseModel):
    amount_cents: int
    idempotency_key: Optional[str] = None


class TradeBody(BaseModel):
    outcome: str
    spend_cents: int
    idempotency_key: Optional[str] = None


class CreateMarketBody(BaseModel):
    kind: str = "binary"
    asset_id: Optional[str] = None
    threshold_cents: Optional[int] = None
    b: Optional[float] = None
    cutoff: Optional[float] = None
    market_a: Optional[str] = None
    market_b: Optional[str] = None
    idempotency_key: Optional[str] = None


class SettleBody(BaseModel):
    market_id: str
    announced_price_cents: int
    idempotency_key: Optional[str] = None


# ----------------------------------------------------------------------
# App factory
# ----------------------------------------------------------------------


def create_app(
    config: ServiceConfig, clock: Callable[[], float] = time.time
) -> FastAPI:
    state = build_state(config, clock=clock)
    app = FastAPI(title="toxmarket", version="0.1.0")
    app.state.toxmarket = state

    def bearer_token(authorization: Optional[str]) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise AuthError("missing bearer token")
        return authorization.removeprefix("Bearer ")

    def require_admin(authorization: Optional[str] = Header(default=None)) -> None:
        if bearer_token(authorization) != config.admin_token:
            raise AuthError("admin token required")

    def require_account(authorization: Optional[str] = Header(default=None)) -> str:
        token = bearer_token(authorization)
        session = state.sessions.get(token)
        if session is None:
            raise AuthError("unknown token")
        if state.clock() >= session.expires_at:
            raise AuthError("token expired")
        return session.account_id

    # -------------------------------------------------- error mapping

    @app.exception_handler(ToxmarketError)
    def domain_error(_request: Request, exc: ToxmarketError):
        status = 400
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, AuthError):
            status = 401
        elif isinstance(exc, StateConflictError):
            status = 409
        elif isinstance(exc, IngestError):
            status = 422
        body = {"error": str(exc), "kind": type(exc).__name__}
        if isinstance(exc, WagerCapExceededError):
            body["remaining_cap_cents"] = exc.remaining_cents
        return JSONResponse(status_code=status, content=body)

    @app.exception_handler(RequestValidationError)
    def invalid_request(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": str(exc.errors()), "kind": "RequestValidationError"},
        )

    # -------------------------------------------------- assets

    @app.get("/assets")
    def list_assets():
        return {
            "assets": [
                {
                    "asset_id": a.asset_id,
                    "title": a.title,
                    "county": a.county,
                    "latitude": a.latitude,
                    "longitude": a.longitude,
                    "book_value_cents": a.book_value_cents,
                    "loan_reference": a.loan_reference,
                    "status": a.status.value,
                }
                for a in state.registry
            ]
        }

    @app.get("/assets/nearby")
    def assets_nearby(
        lat: float = Query(...), lon: float = Query(...), radius_km: float = Query(...)
    ):
        hits = state.registry.nearby(lat, lon, radius_km)
        return {
            "assets": [
                {"asset_id": a.asset_id, "title": a.title, "county": a.county,
                 "distance_km": d}
                for a, d in hits
            ]
        }

    @app.get("/assets/{asset_id}/curve")
    def asset_curve(asset_id: str):
        from .settlement import implied_curve

        curve = implied_curve(state.exchange, asset_id)
        return {
            "asset_id": curve.asset_id,
            "points": [
                {"threshold_cents": p.threshold_cents, "p_higher": p.p_higher}
                for p in curve.points
            ],
        }

    # -------------------------------------------------- markets

    @app.get("/markets")
    def list_markets():
        return {
            "markets": [
                state.market_payload(m)
                for m in state.exchange.markets.values()
                if m.asset_id is not None
            ]
        }

    @app.get("/joint-markets")
    def list_joint_markets():
        return {"joint_markets": [state.joint_payload(j) for j in state.book.joints]}

    @app.get("/markets/{market_id}")
    def get_market(market_id: str):
        return state.market_payload(state.exchange.market(market_id))

    @app.get("/markets/{market_id}/quote")
    def quote(
        market_id: str,
        outcome: str = Query(...),
        spend_cents: int = Query(..., gt=0),
        authorization: Optional[str] = Header(default=None),
    ):
        market = state.exchange.market(market_id)
        if state.effective_state(market) != MarketState.OPEN.value:
            raise StateConflictError(f"market {market_id} is not open for quoting")
        index = market.outcome_index(outcome)
        shares = lmsr.shares_for_spend(market.q, market.b, index, spend_cents / 100.0)
        q_after = list(market.q)
        q_after[index] += shares
        body = {
            "market_id": market_id,
            "outcome": outcome,
            "spend_cents": spend_cents,
            "shares": shares,
            "prices_before": dict(zip(market.outcomes, market.prices())),
            "prices_after": dict(zip(market.outcomes, lmsr.prices(q_after, market.b))),
        }
        if authorization:
            account_id = require_account(authorization)
            body["remaining_cap_cents"] = state.exchange.remaining_cap_cents(
                account_id, market_id
            )
        return body

    @app.post("/markets/{market_id}/trades")
    def post_trade(
        market_id: str,
        body: TradeBody,
        account_id: str = Depends(require_account),
    ):
        return state.submit(
            {
                "type": "trade_executed",
                "account_id": account_id,
                "market_id": market_id,
                "outcome": body.outcome,
                "spend_cents": body.spend_cents,
                "now": state.clock(),
            },
            idempotency_key=body.idempotency_key,
        )

    # -------------------------------------------------- accounts

    @app.post("/accounts", status_code=201)
    def open_account(body: OpenAccountBody, _admin: None = Depends(require_admin)):
        now = state.clock()
        return state.submit(
            {
                "type": "account_opened",
                "account_id": body.account_id,
                "attested_over_18": body.attested_over_18,
                "token": secrets.token_hex(16),
                "issued_at": now,
                "expires_at": now + config.token_ttl_seconds,
            },
            idempotency_key=body.idempotency_key,
        )

    @app.get("/accounts/{account_id}")
    def get_account(
        account_id: str, authorization: Optional[str] = Header(default=None)
    ):
        token = bearer_token(authorization)
        if token != config.admin_token and require_account(authorization) != account_id:
            raise AuthError("token does not grant access to this account")
        return state.account_payload(account_id)

    @app.post("/accounts/{account_id}/credit")
    def credit_account(
        account_id: str, body: CreditBody, _admin: None = Depends(require_admin)
    ):
        return state.submit(
            {
                "type": "account_credited",
                "account_id": account_id,
                "amount_cents": body.amount_cents,
            },
            idempotency_key=body.idempotency_key,
        )

    # -------------------------------------------------- admin

    @app.post("/admin/markets", status_code=201)
    def admin_create_market(body: CreateMarketBody, _admin: None = Depends(require_admin)):
        if body.kind == "binary":
            if body.asset_id is None or body.threshold_cents is None:
                raise ArgumentError("binary market needs asset_id and threshold_cents")
            return state.submit(
                {
                    "type": "market_created",
                    "asset_id": body.asset_id,
                    "threshold_cents": body.threshold_cents,
                    "b": config.default_b if body.b is None else body.b,
                    "cutoff": body.cutoff,
                    "now": state.clock(),
                },
                idempotency_key=body.idempotency_key,
            )
        if body.kind == "joint":
            if body.market_a is None or body.market_b is None:
                raise ArgumentError("joint market needs market_a and market_b")
            return state.submit(
                {
                    "type": "joint_created",
                    "market_a": body.market_a,
                    "market_b": body.market_b,
                    "b": config.default_b if body.b is None else body.b,
                },
                idempotency_key=body.idempotency_key,
            )
        raise ArgumentError(f"unknown market kind {body.kind!r}")

    @app.post("/admin/settle")
    def admin_settle(body: SettleBody, _admin: None = Depends(require_admin)):
        return state.submit(
            {
                "type": "market_settled",
                "market_id": body.market_id,
                "announced_price_cents": body.announced_price_cents,
                "now": state.clock(),
            },
            idempotency_key=body.idempotency_key,
        )

    # -------------------------------------------------- docs

    @app.get("/docs/guidelines")
    def guidelines():
        if config.guidelines_path and os.path.exists(config.guidelines_path):
            with open(config.guidelines_path, "r", encoding="utf-8") as fh:
                return PlainTextResponse(fh.read())
        return PlainTextResponse(DEFAULT_GUIDELINES)

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service; blocks until interrupted."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="info")
