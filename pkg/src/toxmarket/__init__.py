"""toxmarket: a prediction-market exchange for impaired-asset transfer prices.

Subpackages by responsibility:

* :mod:`toxmarket.registry` — asset ingest, validation, proximity queries
* :mod:`toxmarket.lmsr` — the logarithmic-scoring-rule market maker
* :mod:`toxmarket.exchange` — markets, accounts, trades, the scrip ledger
* :mod:`toxmarket.settlement` — halting, resolution, payouts, curve auditing
* :mod:`toxmarket.combinatorial` — joint markets and pair proposal
* :mod:`toxmarket.optimizer` — budget-constrained basket selection (MIP)
* :mod:`toxmarket.simulator` — agent-based validation harness
* :mod:`toxmarket.service` — HTTP/JSON facade with a replayable journal
"""

__version__ = "0.1.0"
