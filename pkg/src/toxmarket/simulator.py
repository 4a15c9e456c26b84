"""Agent-based sessions that exercise the exchange end to end.

One session opens a ladder of higher/lower markets on a single asset,
lets configured populations of agents trade for a number of rounds, then
halts, resolves at the ground-truth transfer price, and audits the
ledger. Four agent classes:

* informed: draw one noisy signal of the true price at session start and
  each round buy the side their signal favors whenever the market
  underprices it relative to their belief, with a per-round spend cap;
* noise: buy a uniformly random outcome of a random ladder market for a
  random admissible spend;
* manipulators: greedily shove every market toward a target outcome;
* arbitrageurs: trade against detected exceedance-curve violations
  (HIGHER at the lower threshold, LOWER at the upper).

The round counter doubles as the exchange clock, every agent owns an
independent RNG stream spawned from the session seed, and trades are
serialized in a seeded shuffle each round, so a session is bit-for-bit
reproducible and agent classes keep their randomness when other classes
are added or removed (paired-seed experiments rely on this).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ArgumentError
from .exchange import Exchange, ExchangeConfig, HIGHER, LOWER, Market, MarketState
from .registry import Asset, AssetRegistry
from .settlement import (
    CurvePoint,
    ImpliedCurve,
    detect_arbitrage,
    halt_at_cutoff,
    resolve_and_settle,
)

DEFAULT_ARB_EPSILON = 0.02


@dataclass(frozen=True)
class SimConfig:
    seed: int
    true_price_cents: int
    thresholds_cents: tuple[int, ...]
    rounds: int = 200
    n_informed: int = 0
    n_noise: int = 0
    n_manipulators: int = 0
    n_arbitrageurs: int = 0
    signal_noise_sigma_cents: float = 0.0
    b: float = 100.0
    wager_cap_cents: int = 100_000
    informed_budget_cents: int = 1_000_000
    noise_budget_cents: int = 1_000_000
    manipulator_budget_cents: int = 100_000
    arbitrageur_budget_cents: int = 1_000_000
    informed_round_spend_cents: int = 200
    noise_max_spend_cents: int = 200
    manipulator_round_spend_cents: int = 100_000
    arbitrageur_round_spend_cents: int = 1_000
    manipulation_target: str = LOWER
    arb_epsilon: float = DEFAULT_ARB_EPSILON

    def validate(self) -> None:
        counts = (self.n_informed, self.n_noise, self.n_manipulators, self.n_arbitrageurs)
        if any(c < 0 for c in counts):
            raise ArgumentError("agent counts must be >= 0")
        if self.rounds < 1:
            raise ArgumentError("rounds must be >= 1")
        if self.signal_noise_sigma_cents < 0:
            raise ArgumentError("signal noise sigma must be >= 0")
        if self.true_price_cents <= 0:
            raise ArgumentError("true price must be positive")
        if not self.thresholds_cents:
            raise ArgumentError("need at least one threshold")
        if list(self.thresholds_cents) != sorted(set(self.thresholds_cents)):
            raise ArgumentError("thresholds must be strictly increasing")
        if self.manipulation_target not in (HIGHER, LOWER):
            raise ArgumentError(f"bad manipulation target {self.manipulation_target!r}")
        if self.b <= 0:
            raise ArgumentError("b must be > 0")


@dataclass(frozen=True)
class ArbWindow:
    pair: tuple[int, int]          # adjacent curve indices (i, i+1)
    opened_round: int
    closed_round: Optional[int]    # None if still open at session end


@dataclass(frozen=True)
class SimMetrics:
    thresholds_cents: tuple[int, ...]
    rounds: int
    true_price_cents: int                     # effective (post-shock) truth
    price_rounds: tuple[tuple[float, ...], ...]  # per round, HIGHER price per threshold
    final_prices: tuple[float, ...]
    final_errors: tuple[float, ...]           # |p - indicator(true > t)|
    half_life_rounds: Optional[int]           # None: shock never half-reverted
    arbitrage_windows: tuple[ArbWindow, ...]
    total_credits_cents: int
    maker_take_cents: int
    total_payout_cents: int
    ledger_conserved: bool
    manipulator_profit_cents: Optional[int]


@dataclass(frozen=True)
class ManipulationReport:
    baseline: SimMetrics
    treatment: SimMetrics
    displacement: tuple[float, ...]           # |p_treat - p_base| per threshold
    manipulator_profit_cents: int


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


# ----------------------------------------------------------------------
# Agents
# ----------------------------------------------------------------------


class _Agent:
    def __init__(self, account_id: str, rng: np.random.Generator):
        self.account_id = account_id
        self.rng = rng

    def act(self, sess: "_Session") -> None:
        raise NotImplementedError

    def _buy(self, sess: "_Session", market: Market, outcome: str, want_cents: int) -> None:
        account = sess.exchange.accounts[self.account_id]
        allow = sess.exchange.remaining_cap_cents(self.account_id, market.market_id)
        spend = min(want_cents, allow, account.balance_cents)
        if spend >= 1:
            sess.exchange.execute_trade(
                self.account_id, market.market_id, outcome, spend, now=float(sess.round)
            )


class _Informed(_Agent):
    def __init__(self, account_id, rng, config: SimConfig):
        super().__init__(account_id, rng)
        self.config = config
        self.signal = self._draw_signal(config.true_price_cents)

    def _draw_signal(self, center_cents: int) -> float:
        return center_cents + self.config.signal_noise_sigma_cents * float(
            self.rng.standard_normal()
        )

    def redraw(self, new_center_cents: int) -> None:
        self.signal = self._draw_signal(new_center_cents)

    def belief_higher(self, threshold_cents: int) -> float:
        sigma = self.config.signal_noise_sigma_cents
        if sigma == 0:
            return 1.0 if self.signal > threshold_cents else 0.0
        return _norm_cdf((self.signal - threshold_cents) / sigma)

    def act(self, sess: "_Session") -> None:
        spend = self.config.informed_round_spend_cents
        for market in sess.ladder:
            if market.state is not MarketState.OPEN:
                continue
            p_higher = market.prices()[0]
            belief = self.belief_higher(market.threshold_cents)
            if self.signal > market.threshold_cents and p_higher < belief:
                self._buy(sess, market, HIGHER, spend)
            elif self.signal < market.threshold_cents and p_higher > belief:
                # LOWER is underpriced: 1 - p_higher < 1 - belief
                self._buy(sess, market, LOWER, spend)


class _Noise(_Agent):
    def __init__(self, account_id, rng, config: SimConfig):
        super().__init__(account_id, rng)
        self.config = config

    def act(self, sess: "_Session") -> None:
        market = sess.ladder[int(self.rng.integers(len(sess.ladder)))]
        outcome = HIGHER if self.rng.integers(2) == 0 else LOWER
        want = int(self.rng.integers(1, self.config.noise_max_spend_cents + 1))
        if market.state is MarketState.OPEN:
            self._buy(sess, market, outcome, want)


class _Manipulator(_Agent):
    def __init__(self, account_id, rng, config: SimConfig):
        super().__init__(account_id, rng)
        self.config = config

    def act(self, sess: "_Session") -> None:
        for market in sess.ladder:
            if market.state is MarketState.OPEN:
                self._buy(
                    sess,
                    market,
                    self.config.manipulation_target,
                    self.config.manipulator_round_spend_cents,
                )


class _Arbitrageur(_Agent):
    def __init__(self, account_id, rng, config: SimConfig):
        super().__init__(account_id, rng)
        self.config = config

    def act(self, sess: "_Session") -> None:
        curve = sess.current_curve()
        spend = self.config.arbitrageur_round_spend_cents
        for i, j in detect_arbitrage(curve, self.config.arb_epsilon):
            # exceedance inversion: HIGHER is cheap at t_i, LOWER cheap at t_j
            low, high = sess.ladder[i], sess.ladder[j]
            if low.state is MarketState.OPEN:
                self._buy(sess, low, HIGHER, spend)
            if high.state is MarketState.OPEN:
                self._buy(sess, high, LOWER, spend)


# ----------------------------------------------------------------------
# Session
# ----------------------------------------------------------------------


class _Session:
    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.round = 0

        registry = AssetRegistry()
        registry.add(
            Asset(
                asset_id="sim-asset",
                title="simulated asset",
                county="Sim",
                latitude=52.0,
                longitude=-8.0,
                book_value_cents=config.true_price_cents,
                loan_reference="sim",
            )
        )
        self.exchange = Exchange(
            registry,
            ExchangeConfig(
                default_b=config.b,
                wager_cap_cents=config.wager_cap_cents,
                starting_balance_cents=0,
            ),
            clock=lambda: float(self.round),
        )
        cutoff = float(config.rounds + 1)
        self.ladder = [
            self.exchange.create_market("sim-asset", t, b=config.b, cutoff=cutoff, now=0.0)
            for t in config.thresholds_cents
        ]

        # independent stream per agent so populations can change without
        # disturbing anyone else's randomness
        def stream(*key: int) -> np.random.Generator:
            return np.random.Generator(
                np.random.PCG64(np.random.SeedSequence(config.seed, spawn_key=key))
            )

        self.order_rng = stream(0)
        self.agents: list[_Agent] = []
        self.informed: list[_Informed] = []
        self.manipulators: list[_Manipulator] = []

        def hire(cls, count, budget, class_key):
            members = []
            for i in range(count):
                account = self.exchange.open_account(f"{cls.__name__.lstrip('_').lower()}-{i:03d}")
                if budget > 0:
                    self.exchange.credit(account.account_id, budget)
                members.append(cls(account.account_id, stream(class_key, i), config))
            return members

        self.informed = hire(_Informed, config.n_informed, config.informed_budget_cents, 1)
        noise = hire(_Noise, config.n_noise, config.noise_budget_cents, 2)
        self.manipulators = hire(
            _Manipulator, config.n_manipulators, config.manipulator_budget_cents, 3
        )
        arbs = hire(_Arbitrageur, config.n_arbitrageurs, config.arbitrageur_budget_cents, 4)
        self.agents = [*self.informed, *noise, *self.manipulators, *arbs]

    def current_curve(self) -> ImpliedCurve:
        return ImpliedCurve(
            asset_id="sim-asset",
            points=tuple(
                CurvePoint(threshold_cents=m.threshold_cents, p_higher=m.prices()[0])
                for m in self.ladder
            ),
        )

    def ladder_prices(self) -> tuple[float, ...]:
        return tuple(m.prices()[0] for m in self.ladder)

    def check_invariants(self) -> None:
        for market in self.ladder:
            if abs(math.fsum(market.prices()) - 1.0) > 1e-12:
                raise AssertionError(f"prices of {market.market_id} do not sum to 1")
        self.exchange.check_conservation()
        cap = self.config.wager_cap_cents
        for account in self.exchange.accounts.values():
            if any(w > cap for w in account.wagered_cents.values()):
                raise AssertionError(f"wager cap breached by {account.account_id}")


def run_session(
    config: SimConfig,
    shock_round: Optional[int] = None,
    new_true_price_cents: Optional[int] = None,
    check_invariants: bool = True,
) -> SimMetrics:
    """Run one session to settlement and collect metrics.

    Deterministic given the config (the seed drives every stream).
    """
    if (shock_round is None) != (new_true_price_cents is None):
        raise ArgumentError("shock_round and new_true_price_cents go together")
    if shock_round is not None and not (1 <= shock_round < config.rounds):
        raise ArgumentError(f"shock_round must be in [1, rounds), got {shock_round}")

    sess = _Session(config)
    thresholds = config.thresholds_cents
    price_rounds: list[tuple[float, ...]] = []
    pre_shock: Optional[tuple[float, ...]] = None

    open_windows: dict[tuple[int, int], int] = {}
    windows: list[ArbWindow] = []

    for r in range(1, config.rounds + 1):
        sess.round = r
        if shock_round is not None and r == shock_round:
            pre_shock = price_rounds[-1] if price_rounds else sess.ladder_prices()
            for agent in sess.informed:
                agent.redraw(new_true_price_cents)
        for idx in sess.order_rng.permutation(len(sess.agents)):
            sess.agents[int(idx)].act(sess)
        prices = sess.ladder_prices()
        price_rounds.append(prices)

        violated = set(detect_arbitrage(sess.current_curve(), config.arb_epsilon))
        for pair in violated:
            open_windows.setdefault(pair, r)
        for pair in list(open_windows):
            if pair not in violated:
                windows.append(ArbWindow(pair, open_windows.pop(pair), r))
        if check_invariants:
            sess.check_invariants()

    for pair, opened in sorted(open_windows.items()):
        windows.append(ArbWindow(pair, opened, None))
    windows.sort(key=lambda w: (w.opened_round, w.pair))

    # settle every market at the effective truth
    true_cents = new_true_price_cents if new_true_price_cents is not None else config.true_price_cents
    settle_now = float(config.rounds + 1)
    for market in sess.ladder:
        halt_at_cutoff(market, settle_now)
        resolve_and_settle(sess.exchange, market.market_id, true_cents, now=settle_now)

    lhs, rhs = sess.exchange.ledger_identity()
    conserved = lhs == rhs
    if check_invariants and not conserved:
        raise AssertionError(f"ledger drift after settlement: {lhs} != {rhs}")

    final_prices = price_rounds[-1]
    final_errors = tuple(
        abs(p - (1.0 if true_cents > t else 0.0)) for p, t in zip(final_prices, thresholds)
    )

    half_life = None
    if shock_round is not None:
        half_life = _half_life(
            thresholds,
            price_rounds,
            pre_shock,
            shock_round,
            config.true_price_cents,
            new_true_price_cents,
        )

    manip_profit = None
    if sess.manipulators:
        manip_profit = sum(
            sess.exchange.accounts[m.account_id].balance_cents for m in sess.manipulators
        ) - config.manipulator_budget_cents * len(sess.manipulators)

    return SimMetrics(
        thresholds_cents=thresholds,
        rounds=config.rounds,
        true_price_cents=true_cents,
        price_rounds=tuple(price_rounds),
        final_prices=final_prices,
        final_errors=final_errors,
        half_life_rounds=half_life,
        arbitrage_windows=tuple(windows),
        total_credits_cents=sess.exchange.total_credits_cents,
        maker_take_cents=sess.exchange.maker_take_cents,
        total_payout_cents=sess.exchange.total_payout_cents,
        ledger_conserved=conserved,
        manipulator_profit_cents=manip_profit,
    )


def _half_life(
    thresholds, price_rounds, pre_shock, shock_round, old_true, new_true
) -> Optional[int]:
    """Rounds until the flipped threshold's price crosses halfway to its
    new asymptote; max over flipped thresholds, 0 when nothing flips."""
    flipped = [
        k
        for k, t in enumerate(thresholds)
        if (old_true > t) != (new_true > t)
    ]
    if not flipped:
        return 0
    worst = 0
    for k in flipped:
        asym = 1.0 if new_true > thresholds[k] else 0.0
        halfway = (pre_shock[k] + asym) / 2.0
        crossed = None
        for r in range(shock_round, len(price_rounds) + 1):
            p = price_rounds[r - 1][k]
            if (asym > pre_shock[k] and p >= halfway) or (
                asym < pre_shock[k] and p <= halfway
            ):
                crossed = r - shock_round + 1
                break
        if crossed is None:
            return None
        worst = max(worst, crossed)
    return worst


def shock_session(
    config: SimConfig, shock_round: int, new_true_price_cents: int
) -> SimMetrics:
    """Session in which informed agents redraw signals around a new truth
    at ``shock_round``; settlement uses the new truth."""
    return run_session(
        config, shock_round=shock_round, new_true_price_cents=new_true_price_cents
    )


def manipulation_experiment(config: SimConfig) -> ManipulationReport:
    """Paired-seed run: identical config with and without manipulators.

    Informed/noise/arbitrageur streams are keyed per class and index, so
    the two runs share all non-manipulator randomness.
    """
    if config.n_manipulators < 1:
        raise ArgumentError("treatment config needs n_manipulators >= 1")
    baseline = run_session(replace(config, n_manipulators=0))
    treatment = run_session(config)
    displacement = tuple(
        abs(t - b) for t, b in zip(treatment.final_prices, baseline.final_prices)
    )
    return ManipulationReport(
        baseline=baseline,
        treatment=treatment,
        displacement=displacement,
        manipulator_profit_cents=treatment.manipulator_profit_cents or 0,
    )


def format_metrics(metrics: SimMetrics) -> str:
    """Round-by-round export plus a summary block."""
    lines = ["round,threshold_cents,p_higher"]
    for r, prices in enumerate(metrics.price_rounds, start=1):
        for t, p in zip(metrics.thresholds_cents, prices):
            lines.append(f"{r},{t},{p!r}")
    lines.append("# summary")
    lines.append(f"# true_price_cents={metrics.true_price_cents}")
    for t, e in zip(metrics.thresholds_cents, metrics.final_errors):
        lines.append(f"# final_abs_error[{t}]={e!r}")
    lines.append(f"# half_life_rounds={metrics.half_life_rounds}")
    lines.append(f"# arbitrage_windows={len(metrics.arbitrage_windows)}")
    lines.append(
        "# ledger credits={} maker_take={} payouts={} conserved={}".format(
            metrics.total_credits_cents,
            metrics.maker_take_cents,
            metrics.total_payout_cents,
            metrics.ledger_conserved,
        )
    )
    if metrics.manipulator_profit_cents is not None:
        lines.append(f"# manipulator_profit_cents={metrics.manipulator_profit_cents}")
    return "\n".join(lines) + "\n"
