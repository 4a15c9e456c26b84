"""Asset registry: ingest, validation, storage, and proximity queries.

Assets arrive as UTF-8 comma-delimited text with a fixed header
(``asset_id,title,county,latitude,longitude,book_value_cents,loan_reference``).
Ingest is record-by-record: a bad row is rejected with a reason while the
rest of the file goes through. Geographic queries use great-circle
(haversine) distance; the asset population spans whole countries, so a
planar approximation is not acceptable.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterator, Union

from .errors import ArgumentError, IngestError, NotFoundError

EARTH_RADIUS_KM = 6371.0

ASSET_COLUMNS = (
    "asset_id",
    "title",
    "county",
    "latitude",
    "longitude",
    "book_value_cents",
    "loan_reference",
)


class AssetStatus(str, Enum):
    REGISTERED = "REGISTERED"
    MARKET_OPEN = "MARKET_OPEN"
    SETTLED = "SETTLED"


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in kilometers (mean Earth radius 6371.0 km)."""
    p1 = math.radians(lat1)
    p2 = math.radians(lat2)
    dp = math.radians(lat2 - lat1)
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2.0) ** 2
    # asin form is accurate for small distances where the cosine form loses digits
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def _check_coords(latitude: float, longitude: float) -> None:
    if not (math.isfinite(latitude) and -90.0 <= latitude <= 90.0):
        raise ArgumentError(f"latitude {latitude!r} outside [-90, 90]")
    if not (math.isfinite(longitude) and -180.0 <= longitude <= 180.0):
        raise ArgumentError(f"longitude {longitude!r} outside [-180, 180]")


@dataclass
class Asset:
    """A registered property or loan; the underlying of every market."""

    asset_id: str
    title: str
    county: str
    latitude: float
    longitude: float
    book_value_cents: int
    loan_reference: str
    status: AssetStatus = AssetStatus.REGISTERED

    def validate(self) -> None:
        if not self.asset_id:
            raise ArgumentError("asset_id must be non-empty")
        _check_coords(self.latitude, self.longitude)
        if not isinstance(self.book_value_cents, int) or self.book_value_cents <= 0:
            raise ArgumentError("book_value_cents must be a positive integer")


@dataclass(frozen=True)
class RejectedRecord:
    line: int
    reason: str


@dataclass(frozen=True)
class IngestReport:
    accepted: int
    rejected: tuple[RejectedRecord, ...] = ()
    accepted_ids: tuple[str, ...] = ()

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)


@dataclass
class AssetRegistry:
    """In-memory asset store keyed by asset_id."""

    schema_version: int = 1
    assets: dict[str, Asset] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.assets)

    def __contains__(self, asset_id: str) -> bool:
        return asset_id in self.assets

    def __iter__(self) -> Iterator[Asset]:
        """Assets in canonical order (asset_id ascending)."""
        for asset_id in sorted(self.assets):
            yield self.assets[asset_id]

    def get(self, asset_id: str) -> Asset:
        try:
            return self.assets[asset_id]
        except KeyError:
            raise NotFoundError(f"unknown asset {asset_id!r}") from None

    def add(self, asset: Asset) -> None:
        asset.validate()
        if asset.asset_id in self.assets:
            raise ArgumentError(f"duplicate asset_id {asset.asset_id!r}")
        self.assets[asset.asset_id] = asset

    # ------------------------------------------------------------------
    # Ingest / export
    # ------------------------------------------------------------------

    def ingest(self, stream: Union[IO[bytes], IO[str], str, bytes]) -> IngestReport:
        """Ingest the documented delimited format; partial ingest allowed.

        Valid records are inserted; invalid ones are individually rejected
        with their line number and a reason. An unreadable stream (bad
        encoding, missing or wrong header) raises :class:`IngestError`.
        """
        text = _as_text(stream)
        if not text.strip():
            return IngestReport(accepted=0, rejected=())
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except csv.Error as exc:
            raise IngestError(f"unreadable input: {exc}") from None
        if tuple(h.strip() for h in header) != ASSET_COLUMNS:
            raise IngestError(
                f"bad header {header!r}; expected {','.join(ASSET_COLUMNS)}"
            )

        accepted: list[str] = []
        rejected: list[RejectedRecord] = []
        seen_in_batch: set[str] = set()
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as exc:
                # csv-level damage is confined to one record
                rejected.append(RejectedRecord(reader.line_num, f"malformed csv: {exc}"))
                continue
            line = reader.line_num
            if not row:
                continue
            try:
                asset = _parse_record(row)
                if asset.asset_id in self.assets or asset.asset_id in seen_in_batch:
                    raise ArgumentError(f"duplicate asset_id {asset.asset_id!r}")
                self.add(asset)
                seen_in_batch.add(asset.asset_id)
                accepted.append(asset.asset_id)
            except ArgumentError as exc:
                rejected.append(RejectedRecord(line, str(exc)))
        return IngestReport(
            accepted=len(accepted),
            rejected=tuple(rejected),
            accepted_ids=tuple(accepted),
        )

    def export(self) -> str:
        """Canonical export: header plus records in asset_id order.

        Ingesting the export into a fresh registry reproduces it byte for byte.
        """
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(ASSET_COLUMNS)
        for asset in self:
            writer.writerow(
                [
                    asset.asset_id,
                    asset.title,
                    asset.county,
                    repr(asset.latitude),
                    repr(asset.longitude),
                    str(asset.book_value_cents),
                    asset.loan_reference,
                ]
            )
        return out.getvalue()

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def nearby(
        self, latitude: float, longitude: float, radius_km: float
    ) -> list[tuple[Asset, float]]:
        """Assets within ``radius_km`` of the point, nearest first.

        Ties in distance break by asset_id ascending.
        """
        _check_coords(latitude, longitude)
        if not (math.isfinite(radius_km) and radius_km >= 0.0):
            raise ArgumentError("radius_km must be >= 0")
        hits = []
        for asset in self.assets.values():
            d = haversine_km(latitude, longitude, asset.latitude, asset.longitude)
            if d <= radius_km:
                hits.append((asset, d))
        hits.sort(key=lambda pair: (pair[1], pair[0].asset_id))
        return hits


def _parse_record(row: list[str]) -> Asset:
    if len(row) != len(ASSET_COLUMNS):
        raise ArgumentError(
            f"expected {len(ASSET_COLUMNS)} fields, got {len(row)}"
        )
    asset_id, title, county, lat_s, lon_s, value_s, loan_ref = (f.strip() for f in row)
    try:
        latitude = float(lat_s)
        longitude = float(lon_s)
    except ValueError:
        raise ArgumentError(f"non-numeric coordinates ({lat_s!r}, {lon_s!r})") from None
    try:
        book_value_cents = int(value_s, 10)
    except ValueError:
        raise ArgumentError(f"book_value_cents {value_s!r} is not a base-10 integer") from None
    asset = Asset(
        asset_id=asset_id,
        title=title,
        county=county,
        latitude=latitude,
        longitude=longitude,
        book_value_cents=book_value_cents,
        loan_reference=loan_ref,
    )
    asset.validate()
    return asset


def _as_text(stream: Union[IO[bytes], IO[str], str, bytes]) -> str:
    if isinstance(stream, str):
        return stream
    if isinstance(stream, bytes):
        data: Union[str, bytes] = stream
    else:
        try:
            data = stream.read()
        except (OSError, ValueError) as exc:
            raise IngestError(f"unreadable stream: {exc}") from None
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IngestError(f"input is not valid UTF-8: {exc}") from None
    return data


def ingest_assets(
    stream: Union[IO[bytes], IO[str], str, bytes], registry: AssetRegistry
) -> IngestReport:
    """Operation-style alias for :meth:`AssetRegistry.ingest`."""
    return registry.ingest(stream)


def nearby_assets(
    registry: AssetRegistry, latitude: float, longitude: float, radius_km: float
) -> list[tuple[Asset, float]]:
    """Operation-style alias for :meth:`AssetRegistry.nearby`."""
    return registry.nearby(latitude, longitude, radius_km)
