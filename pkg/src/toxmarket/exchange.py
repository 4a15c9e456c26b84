"""Markets, accounts, trades, and the scrip ledger.

A market is a binary higher/lower security on one asset's transfer price
at a threshold, priced by the LMSR maker in :mod:`toxmarket.lmsr`. The
same machinery carries the 4-outcome joint markets built by
:mod:`toxmarket.combinatorial`.

Money discipline: the ledger (balances, wagers, maker take, payouts) is
integer euro cents and conserves exactly; maker math is double-precision
euro. Trades are spend-driven: the participant names a spend in cents and
receives the shares that spend buys, so the ledger debit equals the real
cost with no rounding drift. Share-driven quotes exist for display and
round up to the cent in the maker's favor.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from . import lmsr
from .errors import (
    ArgumentError,
    InsufficientBalanceError,
    MarketClosedError,
    NotFoundError,
    WagerCapExceededError,
)
from .registry import AssetRegistry, AssetStatus

HIGHER = "HIGHER"
LOWER = "LOWER"
BINARY_OUTCOMES = (HIGHER, LOWER)


class MarketState(str, Enum):
    OPEN = "OPEN"
    HALTED = "HALTED"
    SETTLED = "SETTLED"


def cents_from_euro_ceil(euro: float) -> int:
    """Round a euro amount up to the cent (maker-favorable).

    The 1e-6-cent slack absorbs float representation error so that amounts
    that are mathematically whole cents do not get bumped a cent up.
    """
    return math.ceil(euro * 100.0 - 1e-6)


@dataclass
class Market:
    """One maker-priced market; binary unless built with four outcomes."""

    market_id: str
    asset_id: Optional[str]
    threshold_cents: Optional[int]
    outcomes: tuple[str, ...]
    b: float
    cutoff: float
    q: list[float] = field(default_factory=list)
    state: MarketState = MarketState.OPEN
    _price_cache: Optional[tuple[float, ...]] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not self.q:
            self.q = [0.0] * len(self.outcomes)

    def outcome_index(self, outcome: str) -> int:
        try:
            return self.outcomes.index(outcome)
        except ValueError:
            raise ArgumentError(
                f"unknown outcome {outcome!r}; expected one of {self.outcomes}"
            ) from None

    def prices(self) -> tuple[float, ...]:
        if self._price_cache is None:
            self._price_cache = lmsr.prices(self.q, self.b)
        return self._price_cache

    def price_of(self, outcome: str) -> float:
        return self.prices()[self.outcome_index(outcome)]

    def _apply_fill(self, index: int, shares: float) -> None:
        self.q[index] += shares
        self._price_cache = None


@dataclass
class Account:
    account_id: str
    balance_cents: int = 0
    # market_id -> outcome -> shares held
    positions: dict[str, dict[str, float]] = field(default_factory=dict)
    # market_id -> cumulative cents spent (the wager-cap meter)
    wagered_cents: dict[str, int] = field(default_factory=dict)

    def position(self, market_id: str, outcome: str) -> float:
        return self.positions.get(market_id, {}).get(outcome, 0.0)


@dataclass(frozen=True)
class Trade:
    trade_id: str
    account_id: str
    market_id: str
    outcome: str
    shares: float
    cost_cents: int
    timestamp: float
    prices_after: tuple[float, ...]


@dataclass
class ExchangeConfig:
    default_b: float = 100.0
    wager_cap_cents: int = 100_000        # EUR 1,000 per account per market
    starting_balance_cents: int = 1_000_000  # EUR 10,000


class Exchange:
    """Holds all market, account, and ledger state for one deployment.

    ``clock`` supplies the current time; the simulator injects a round
    counter and the service injects journal timestamps on replay, so all
    state transitions stay deterministic.
    """

    def __init__(
        self,
        registry: AssetRegistry,
        config: Optional[ExchangeConfig] = None,
        clock: Callable[[], float] = time.time,
    ):
        self.registry = registry
        self.config = config or ExchangeConfig()
        self.clock = clock
        self.markets: dict[str, Market] = {}
        self.accounts: dict[str, Account] = {}
        self.trades: list[Trade] = []
        # settlement records, filled in by toxmarket.settlement
        self.resolutions: dict[str, object] = {}
        self.settlement_rows: list[object] = []
        # ledger conservation terms, all integer cents
        self.total_credits_cents = 0
        self.maker_take_cents = 0
        self.total_payout_cents = 0
        self._market_seq = 0
        self._account_seq = 0
        self._trade_seq = 0

    # ------------------------------------------------------------------
    # Lookups
    # ------------------------------------------------------------------

    def market(self, market_id: str) -> Market:
        try:
            return self.markets[market_id]
        except KeyError:
            raise NotFoundError(f"unknown market {market_id!r}") from None

    def account(self, account_id: str) -> Account:
        try:
            return self.accounts[account_id]
        except KeyError:
            raise NotFoundError(f"unknown account {account_id!r}") from None

    # ------------------------------------------------------------------
    # Accounts and the scrip ledger
    # ------------------------------------------------------------------

    def open_account(self, account_id: Optional[str] = None) -> Account:
        """Create an account and issue the configured starting balance."""
        if account_id is None:
            self._account_seq += 1
            account_id = f"a-{self._account_seq:06d}"
        if account_id in self.accounts:
            raise ArgumentError(f"account {account_id!r} already exists")
        account = Account(account_id=account_id)
        self.accounts[account_id] = account
        if self.config.starting_balance_cents > 0:
            self.credit(account_id, self.config.starting_balance_cents)
        return account

    def credit(self, account_id: str, amount_cents: int) -> int:
        """Top up an account; returns the new balance in cents."""
        account = self.account(account_id)
        if not isinstance(amount_cents, int) or amount_cents <= 0:
            raise ArgumentError(f"credit amount must be a positive integer, got {amount_cents!r}")
        account.balance_cents += amount_cents
        self.total_credits_cents += amount_cents
        return account.balance_cents

    def remaining_cap_cents(self, account_id: str, market_id: str) -> int:
        account = self.account(account_id)
        wagered = account.wagered_cents.get(market_id, 0)
        return max(0, self.config.wager_cap_cents - wagered)

    # ------------------------------------------------------------------
    # Markets
    # ------------------------------------------------------------------

    def create_market(
        self,
        asset_id: str,
        threshold_cents: int,
        b: Optional[float] = None,
        cutoff: Optional[float] = None,
        now: Optional[float] = None,
    ) -> Market:
        """Open a binary higher/lower market on an asset's transfer price."""
        asset = self.registry.get(asset_id)
        if asset.status is AssetStatus.SETTLED:
            raise MarketClosedError(f"asset {asset_id!r} already settled")
        if not isinstance(threshold_cents, int) or threshold_cents <= 0:
            raise ArgumentError(f"threshold must be a positive integer, got {threshold_cents!r}")
        b = self.config.default_b if b is None else b
        if not (isinstance(b, (int, float)) and math.isfinite(b) and b > 0):
            raise ArgumentError(f"liquidity parameter b must be > 0, got {b!r}")
        now = self.clock() if now is None else now
        if cutoff is None or not math.isfinite(cutoff) or cutoff <= now:
            raise ArgumentError(f"cutoff must lie in the future (now={now!r}, cutoff={cutoff!r})")
        market = self._new_market(
            asset_id=asset_id,
            threshold_cents=threshold_cents,
            outcomes=BINARY_OUTCOMES,
            b=float(b),
            cutoff=cutoff,
        )
        asset.status = AssetStatus.MARKET_OPEN
        return market

    def _new_market(
        self,
        asset_id: Optional[str],
        threshold_cents: Optional[int],
        outcomes: tuple[str, ...],
        b: float,
        cutoff: float,
        market_id: Optional[str] = None,
    ) -> Market:
        if market_id is None:
            self._market_seq += 1
            prefix = "m" if asset_id is not None else "jm"
            market_id = f"{prefix}-{self._market_seq:06d}"
        if market_id in self.markets:
            raise ArgumentError(f"market {market_id!r} already exists")
        market = Market(
            market_id=market_id,
            asset_id=asset_id,
            threshold_cents=threshold_cents,
            outcomes=outcomes,
            b=b,
            cutoff=cutoff,
        )
        self.markets[market_id] = market
        return market

    def prices(self, market_id: str) -> tuple[float, ...]:
        return self.market(market_id).prices()

    # ------------------------------------------------------------------
    # Quoting and trading
    # ------------------------------------------------------------------

    def quote_buy(self, market_id: str, outcome: str, shares: float) -> float:
        """Euro cost (pre-rounding) of buying ``shares`` now."""
        market = self.market(market_id)
        self._require_open(market)
        return lmsr.quote_buy(market.q, market.b, market.outcome_index(outcome), shares)

    def shares_for_spend(self, market_id: str, outcome: str, spend_euro: float) -> float:
        """Shares a euro spend buys at the current state."""
        market = self.market(market_id)
        self._require_open(market)
        return lmsr.shares_for_spend(
            market.q, market.b, market.outcome_index(outcome), spend_euro
        )

    def execute_trade(
        self,
        account_id: str,
        market_id: str,
        outcome: str,
        spend_cents: int,
        now: Optional[float] = None,
    ) -> Trade:
        """Buy ``spend_cents`` worth of an outcome; atomic.

        All validation and maker math happen before the first mutation, so
        any failure leaves q, balance, positions, and wagered untouched.
        """
        market = self.market(market_id)
        account = self.account(account_id)
        self._require_open(market)
        now = self.clock() if now is None else now
        if now >= market.cutoff:
            raise MarketClosedError(
                f"market {market_id} past cutoff ({now!r} >= {market.cutoff!r})"
            )
        if not isinstance(spend_cents, int) or spend_cents <= 0:
            raise ArgumentError(f"spend must be a positive integer in cents, got {spend_cents!r}")
        if account.balance_cents < spend_cents:
            raise InsufficientBalanceError(
                f"balance {account.balance_cents} cents < spend {spend_cents} cents"
            )
        wagered = account.wagered_cents.get(market_id, 0)
        if wagered + spend_cents > self.config.wager_cap_cents:
            raise WagerCapExceededError(
                market_id, remaining_cents=self.config.wager_cap_cents - wagered
            )
        index = market.outcome_index(outcome)
        shares = lmsr.shares_for_spend(market.q, market.b, index, spend_cents / 100.0)
        trade_id = self._next_trade_id()

        # commit: plain assignments only from here on
        market._apply_fill(index, shares)
        account.balance_cents -= spend_cents
        account.positions.setdefault(market_id, {})
        account.positions[market_id][outcome] = (
            account.positions[market_id].get(outcome, 0.0) + shares
        )
        account.wagered_cents[market_id] = wagered + spend_cents
        self.maker_take_cents += spend_cents
        trade = Trade(
            trade_id=trade_id,
            account_id=account_id,
            market_id=market_id,
            outcome=outcome,
            shares=shares,
            cost_cents=spend_cents,
            timestamp=now,
            prices_after=market.prices(),
        )
        self.trades.append(trade)
        return trade

    def _next_trade_id(self) -> str:
        self._trade_seq += 1
        return f"t-{self._trade_seq:06d}"

    @staticmethod
    def _require_open(market: Market) -> None:
        if market.state is not MarketState.OPEN:
            raise MarketClosedError(f"market {market.market_id} is {market.state.value}")

    # ------------------------------------------------------------------
    # Auditing
    # ------------------------------------------------------------------

    def ledger_identity(self) -> tuple[int, int]:
        """(total credits, balances + maker take - payouts); equal when conserved."""
        balances = sum(a.balance_cents for a in self.accounts.values())
        return (
            self.total_credits_cents,
            balances + self.maker_take_cents - self.total_payout_cents,
        )

    def check_conservation(self) -> None:
        lhs, rhs = self.ledger_identity()
        if lhs != rhs:
            raise AssertionError(f"ledger drift: credits {lhs} != identity {rhs}")

    def export_trade_log(self) -> str:
        """Append-only trade log in the documented delimited form."""
        lines = ["trade_id,account_id,market_id,outcome,shares,cost_cents,timestamp"]
        for t in self.trades:
            lines.append(
                f"{t.trade_id},{t.account_id},{t.market_id},{t.outcome},"
                f"{t.shares!r},{t.cost_cents},{t.timestamp!r}"
            )
        return "\n".join(lines) + "\n"
