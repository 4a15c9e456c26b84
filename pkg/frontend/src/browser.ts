/**
 * Market browser: list markets, filter by county, search by radius.
 *
 * Radius search calls the service's nearby endpoint and mirrors its
 * ordering exactly (nearest first); the browser never re-sorts or
 * recomputes distances.
 */

import { ApiClient, AssetSummary, MarketSummary, NearbyAsset } from "./api.js";

export const STALE_AFTER_MS = 10_000;
export const POLL_INTERVAL_MS = 5_000;

export interface MarketRow {
  market: MarketSummary;
  asset: AssetSummary | null;
  distanceKm?: number;
}

export class MarketBrowser {
  markets: MarketSummary[] = [];
  assets = new Map<string, AssetSummary>();
  lastRefreshMs: number | null = null;
  countyFilter: string | null = null;
  /** asset ids in service order when a radius search is active */
  radiusHits: NearbyAsset[] | null = null;

  constructor(private readonly api: ApiClient) {}

  async refresh(nowMs: number): Promise<void> {
    const [marketResp, assetResp] = await Promise.all([
      this.api.listMarkets(),
      this.api.listAssets(),
    ]);
    this.markets = marketResp.markets;
    this.assets = new Map(assetResp.assets.map((a) => [a.asset_id, a]));
    this.lastRefreshMs = nowMs;
  }

  /** True when the view should show the stale-prices indicator. */
  isStale(nowMs: number): boolean {
    return this.lastRefreshMs === null || nowMs - this.lastRefreshMs > STALE_AFTER_MS;
  }

  counties(): string[] {
    return [...new Set([...this.assets.values()].map((a) => a.county))].sort();
  }

  setCountyFilter(county: string | null): void {
    this.countyFilter = county;
  }

  async searchRadius(lat: number, lon: number, radiusKm: number): Promise<void> {
    const resp = await this.api.nearbyAssets(lat, lon, radiusKm);
    this.radiusHits = resp.assets;
  }

  clearRadius(): void {
    this.radiusHits = null;
  }

  /** Explicit empty state for a radius search with no assets in range. */
  get noAssetsInRange(): boolean {
    return this.radiusHits !== null && this.radiusHits.length === 0;
  }

  rows(): MarketRow[] {
    let rows: MarketRow[] = this.markets.map((m) => ({
      market: m,
      asset: m.asset_id ? this.assets.get(m.asset_id) ?? null : null,
    }));
    if (this.countyFilter !== null) {
      rows = rows.filter((r) => r.asset?.county === this.countyFilter);
    }
    if (this.radiusHits !== null) {
      // preserve the service's nearest-first ordering
      const order = new Map(this.radiusHits.map((a, i) => [a.asset_id, i]));
      const distance = new Map(this.radiusHits.map((a) => [a.asset_id, a.distance_km]));
      rows = rows
        .filter((r) => r.market.asset_id !== null && order.has(r.market.asset_id))
        .sort(
          (x, y) =>
            order.get(x.market.asset_id as string)! - order.get(y.market.asset_id as string)!,
        )
        .map((r) => ({ ...r, distanceKm: distance.get(r.market.asset_id as string) }));
    }
    return rows;
  }
}

/** Trading is possible only on OPEN markets; views disable controls otherwise. */
export function tradingEnabled(market: MarketSummary): boolean {
  return market.state === "OPEN";
}
