"""Joint markets: 4-outcome pricing, lift, pair proposal, joint settlement."""

import math

import pytest

from toxmarket.combinatorial import (
    COMPLEMENTS,
    INDEPENDENT,
    JOINT_OUTCOMES,
    SUBSTITUTES,
    JointBook,
    dependency_report,
    joint_max_subsidy,
    joint_prices,
    marginal,
    propose_pairs,
)
from toxmarket.errors import ArgumentError, StateConflictError
from toxmarket.exchange import Exchange, ExchangeConfig, HIGHER, LOWER, MarketState
from toxmarket.registry import Asset, AssetRegistry
from toxmarket.settlement import halt_at_cutoff, resolve_and_settle

CUTOFF = 100.0

ASSETS = [
    # id, lat, lon — Bantry pair ~1 km apart, Dublin far away
    ("BAN-1", 51.680, -9.453),
    ("BAN-2", 51.689, -9.453),
    ("DUB-1", 53.3498, -6.2603),
]


@pytest.fixture
def exchange():
    reg = AssetRegistry()
    for asset_id, lat, lon in ASSETS:
        reg.add(
            Asset(
                asset_id=asset_id,
                title=asset_id,
                county="x",
                latitude=lat,
                longitude=lon,
                book_value_cents=1_000_000,
                loan_reference="ln",
            )
        )
    return Exchange(reg, ExchangeConfig(), clock=lambda: 0.0)


@pytest.fixture
def book(exchange):
    return JointBook(exchange)


def open_base(exchange, asset_id, threshold=25_000_000):
    return exchange.create_market(asset_id, threshold, b=100.0, cutoff=CUTOFF)


class TestCreateJoint:
    def test_fresh_joint_uniform_quarters(self, exchange, book):
        a = open_base(exchange, "BAN-1")
        b = open_base(exchange, "BAN-2")
        joint = book.create_joint_market(a.market_id, b.market_id, b=100.0)
        assert joint.market.outcomes == JOINT_OUTCOMES
        assert joint_prices(joint) == (0.25, 0.25, 0.25, 0.25)
        assert joint.market.cutoff == CUTOFF

    def test_same_event_rejected(self, exchange, book):
        a = open_base(exchange, "BAN-1")
        with pytest.raises(ArgumentError):
            book.create_joint_market(a.market_id, a.market_id)

    def test_zero_b_rejected(self, exchange, book):
        a = open_base(exchange, "BAN-1")
        b = open_base(exchange, "BAN-2")
        with pytest.raises(ArgumentError):
            book.create_joint_market(a.market_id, b.market_id, b=0.0)

    def test_closed_base_rejected(self, exchange, book):
        a = open_base(exchange, "BAN-1")
        b = open_base(exchange, "BAN-2")
        halt_at_cutoff(a, CUTOFF)
        with pytest.raises(StateConflictError):
            book.create_joint_market(a.market_id, b.market_id)


class TestJointPricing:
    def make_joint(self, exchange, book):
        a = open_base(exchange, "BAN-1")
        b = open_base(exchange, "BAN-2")
        return book.create_joint_market(a.market_id, b.market_id, b=100.0)

    def test_hh_price_point(self, exchange, book):
        joint = self.make_joint(exchange, book)
        joint.market._apply_fill(0, 10.0)  # q = (10, 0, 0, 0)
        p = joint_prices(joint)
        expected = math.exp(0.1) / (math.exp(0.1) + 3.0)
        assert p[0] == pytest.approx(expected, abs=1e-12)
        assert p[0] == pytest.approx(0.26922, abs=1e-5)

    def test_marginals_partition(self, exchange, book):
        joint = self.make_joint(exchange, book)
        exchange.open_account("alice")
        for outcome, spend in (("HH", 7_00), ("HL", 3_00), ("LL", 11_00)):
            exchange.execute_trade("alice", joint.joint_id, outcome, spend)
        for event in ("a", "b"):
            total = marginal(joint, event, HIGHER) + marginal(joint, event, LOWER)
            assert total == pytest.approx(1.0, abs=1e-12)
        assert abs(math.fsum(joint_prices(joint)) - 1.0) <= 1e-12

    def test_uniform_marginals_are_half(self, exchange, book):
        joint = self.make_joint(exchange, book)
        assert marginal(joint, "a", HIGHER) == pytest.approx(0.5, abs=1e-12)
        assert marginal(joint, "b", HIGHER) == pytest.approx(0.5, abs=1e-12)

    def test_bounded_loss_subsidy_k4(self):
        assert joint_max_subsidy(100.0) == pytest.approx(100.0 * math.log(4.0))


class TestDependencyReport:
    def set_prices(self, joint, target):
        # q_i = b*ln(p_i) reproduces the target distribution exactly
        b = joint.market.b
        joint.market.q = [b * math.log(p) for p in target]
        joint.market._price_cache = None

    def make_joint(self, exchange, book):
        a = open_base(exchange, "BAN-1")
        b = open_base(exchange, "BAN-2")
        return book.create_joint_market(a.market_id, b.market_id, b=100.0)

    def test_uniform_is_independent_with_unit_lift(self, exchange, book):
        joint = self.make_joint(exchange, book)
        report = dependency_report(joint)
        assert report.lift == pytest.approx(1.0, abs=1e-12)
        assert report.classification == INDEPENDENT

    def test_complements(self, exchange, book):
        joint = self.make_joint(exchange, book)
        self.set_prices(joint, (0.4, 0.1, 0.1, 0.4))
        report = dependency_report(joint)
        assert report.p_marginal_a == pytest.approx(0.5, abs=1e-12)
        assert report.lift == pytest.approx(1.6, abs=1e-9)
        assert report.classification == COMPLEMENTS

    def test_substitutes(self, exchange, book):
        joint = self.make_joint(exchange, book)
        self.set_prices(joint, (0.1, 0.4, 0.4, 0.1))
        report = dependency_report(joint)
        assert report.lift == pytest.approx(0.4, abs=1e-9)
        assert report.classification == SUBSTITUTES


class TestProposePairs:
    def test_close_pair_within_radius(self, exchange, book):
        open_base(exchange, "BAN-1")
        open_base(exchange, "BAN-2")
        pairs = propose_pairs(exchange.registry, exchange, radius_km=5.0, max_pairs=10, book=book)
        assert [(a, b) for a, b, _ in pairs] == [("BAN-1", "BAN-2")]
        assert pairs[0][2] < 5.0

    def test_distant_pair_excluded(self, exchange, book):
        open_base(exchange, "BAN-1")
        open_base(exchange, "DUB-1")
        pairs = propose_pairs(exchange.registry, exchange, radius_km=100.0, max_pairs=10, book=book)
        assert pairs == []

    def test_colocated_triple_gives_three_sorted_pairs(self, exchange):
        reg = AssetRegistry()
        for asset_id in ("C", "A", "B"):
            reg.add(
                Asset(
                    asset_id=asset_id,
                    title=asset_id,
                    county="x",
                    latitude=51.0,
                    longitude=-9.0,
                    book_value_cents=100,
                    loan_reference="ln",
                )
            )
        ex = Exchange(reg, clock=lambda: 0.0)
        for asset_id in ("C", "A", "B"):
            ex.create_market(asset_id, 1_000, cutoff=CUTOFF)
        pairs = propose_pairs(reg, ex, radius_km=1.0, max_pairs=10)
        assert [(a, b) for a, b, _ in pairs] == [("A", "B"), ("A", "C"), ("B", "C")]

    def test_existing_joint_market_excluded(self, exchange, book):
        a = open_base(exchange, "BAN-1")
        b = open_base(exchange, "BAN-2")
        book.create_joint_market(a.market_id, b.market_id)
        pairs = propose_pairs(exchange.registry, exchange, radius_km=5.0, max_pairs=10, book=book)
        assert pairs == []

    def test_max_pairs_truncates(self, exchange, book):
        for asset_id, _, _ in ASSETS:
            open_base(exchange, asset_id)
        pairs = propose_pairs(
            exchange.registry, exchange, radius_km=10_000.0, max_pairs=1, book=book
        )
        assert len(pairs) == 1
        assert pairs[0][:2] == ("BAN-1", "BAN-2")  # nearest first

    def test_invalid_arguments(self, exchange, book):
        with pytest.raises(ArgumentError):
            propose_pairs(exchange.registry, exchange, radius_km=0.0, max_pairs=1)
        with pytest.raises(ArgumentError):
            propose_pairs(exchange.registry, exchange, radius_km=1.0, max_pairs=0)


class TestJointSettlement:
    def test_winner_composed_from_base_resolutions(self, exchange, book):
        a = open_base(exchange, "BAN-1", threshold=20_000_000)
        b = open_base(exchange, "BAN-2", threshold=30_000_000)
        joint = book.create_joint_market(a.market_id, b.market_id, b=100.0)
        exchange.open_account("alice")
        trade = exchange.execute_trade("alice", joint.joint_id, "HL", 500)

        with pytest.raises(StateConflictError):
            book.settle_joint(joint.joint_id)  # bases unresolved

        for base in (a, b):
            halt_at_cutoff(base, CUTOFF)
        # announced 25M: above 20M (HIGHER for a), not above 30M (LOWER for b)
        resolve_and_settle(exchange, a.market_id, 25_000_000)
        resolve_and_settle(exchange, b.market_id, 25_000_000)
        payouts = book.settle_joint(joint.joint_id)
        assert joint.market.state is MarketState.SETTLED
        assert exchange.resolutions[joint.joint_id].winning_outcome == "HL"
        assert payouts[0].account_id == "alice"
        assert payouts[0].payout_cents == round(trade.shares * 100.0)
        exchange.check_conservation()

    def test_joint_settlement_at_most_once(self, exchange, book):
        a = open_base(exchange, "BAN-1", threshold=20_000_000)
        b = open_base(exchange, "BAN-2", threshold=30_000_000)
        joint = book.create_joint_market(a.market_id, b.market_id)
        for base in (a, b):
            halt_at_cutoff(base, CUTOFF)
            resolve_and_settle(exchange, base.market_id, 25_000_000)
        book.settle_joint(joint.joint_id)
        with pytest.raises(StateConflictError):
            book.settle_joint(joint.joint_id)
