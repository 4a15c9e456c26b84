"""Deployment configuration: JSON file plus environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from typing import Optional

from .errors import ArgumentError

ENV_PREFIX = "TOXMARKET_"


@dataclass
class ServiceConfig:
    port: int = 8000
    journal_path: str = "toxmarket-journal.jsonl"
    default_b: float = 100.0
    wager_cap_cents: int = 100_000
    starting_balance_cents: int = 1_000_000
    admin_token: str = "admin-local-token"
    token_ttl_seconds: float = 30 * 86_400.0
    guidelines_path: Optional[str] = None


def load_config(path: Optional[str] = None) -> ServiceConfig:
    """Read a JSON config file, then apply TOXMARKET_* env overrides.

    Unknown keys in the file are rejected loudly; silent typos in a
    ledger deployment are worse than a startup failure.
    """
    values: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                values = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ArgumentError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(values, dict):
            raise ArgumentError(f"config {path} must be a JSON object")

    known = {f.name: f.type for f in fields(ServiceConfig)}
    unknown = set(values) - set(known)
    if unknown:
        raise ArgumentError(f"unknown config keys: {sorted(unknown)}")

    for f in fields(ServiceConfig):
        env = os.environ.get(ENV_PREFIX + f.name.upper())
        if env is not None:
            values[f.name] = env

    config = ServiceConfig()
    for f in fields(ServiceConfig):
        if f.name not in values:
            continue
        raw = values[f.name]
        try:
            if f.name in ("port", "wager_cap_cents", "starting_balance_cents"):
                setattr(config, f.name, int(raw))
            elif f.name in ("default_b", "token_ttl_seconds"):
                setattr(config, f.name, float(raw))
            else:
                setattr(config, f.name, raw if raw is None else str(raw))
        except (TypeError, ValueError):
            raise ArgumentError(f"bad value for config key {f.name}: {raw!r}") from None
    return config
