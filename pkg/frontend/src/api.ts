/**
 * Typed client for the toxmarket JSON service.
 *
 * Every number the UI shows originates from one of these responses; the
 * client does no pricing or share math of its own. `fetch` is injectable
 * so contract tests can run against a scripted service.
 */

export type Outcome = string;

export interface AssetSummary {
  asset_id: string;
  title: string;
  county: string;
  latitude: number;
  longitude: number;
  book_value_cents: number;
  loan_reference: string;
  status: string;
}

export interface NearbyAsset {
  asset_id: string;
  title: string;
  county: string;
  distance_km: number;
}

export interface MarketSummary {
  market_id: string;
  asset_id: string | null;
  threshold_cents: number | null;
  outcomes: Outcome[];
  prices: Record<Outcome, number>;
  b: number;
  state: "OPEN" | "HALTED" | "SETTLED";
  cutoff: number;
  resolution?: {
    announced_price_cents: number | null;
    winning_outcome: Outcome;
    resolved_at: number;
  };
}

export interface QuoteResponse {
  market_id: string;
  outcome: Outcome;
  spend_cents: number;
  shares: number;
  prices_before: Record<Outcome, number>;
  prices_after: Record<Outcome, number>;
  remaining_cap_cents?: number;
}

export interface TradeResponse {
  trade_id: string;
  account_id: string;
  market_id: string;
  outcome: Outcome;
  shares: number;
  cost_cents: number;
  timestamp: number;
  prices_after: number[];
  remaining_cap_cents: number;
}

export interface AccountView {
  account_id: string;
  balance_cents: number;
  positions: Record<string, Record<Outcome, number>>;
  wagered_cents: Record<string, number>;
  wager_cap_cents: number;
  remaining_cap_cents: Record<string, number>;
  payouts: {
    market_id: string;
    outcome: Outcome;
    shares: number;
    payout_cents: number;
  }[];
}

export interface CurvePoint {
  threshold_cents: number;
  p_higher: number;
}

export interface ImpliedCurve {
  asset_id: string;
  points: CurvePoint[];
}

export interface OpenedAccount {
  account_id: string;
  token: string;
  balance_cents: number;
  expires_at: number;
}

/** Non-2xx responses carry the service body verbatim. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: Record<string, unknown>,
  ) {
    super(typeof body.error === "string" ? body.error : `HTTP ${status}`);
  }

  /** Remaining allowance on 409 wager-cap conflicts, when the service sent it. */
  get remainingCapCents(): number | undefined {
    const v = this.body["remaining_cap_cents"];
    return typeof v === "number" ? v : undefined;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private token: string | null = null,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    const parsed = text ? JSON.parse(text) : {};
    if (!resp.ok) throw new ApiError(resp.status, parsed);
    return parsed as T;
  }

  listAssets(): Promise<{ assets: AssetSummary[] }> {
    return this.request("GET", "/assets");
  }

  nearbyAssets(lat: number, lon: number, radiusKm: number): Promise<{ assets: NearbyAsset[] }> {
    const q = `lat=${encodeURIComponent(lat)}&lon=${encodeURIComponent(lon)}&radius_km=${encodeURIComponent(radiusKm)}`;
    return this.request("GET", `/assets/nearby?${q}`);
  }

  listMarkets(): Promise<{ markets: MarketSummary[] }> {
    return this.request("GET", "/markets");
  }

  getMarket(marketId: string): Promise<MarketSummary> {
    return this.request("GET", `/markets/${marketId}`);
  }

  getQuote(marketId: string, outcome: Outcome, spendCents: number): Promise<QuoteResponse> {
    const q = `outcome=${encodeURIComponent(outcome)}&spend_cents=${spendCents}`;
    return this.request("GET", `/markets/${marketId}/quote?${q}`);
  }

  postTrade(
    marketId: string,
    outcome: Outcome,
    spendCents: number,
    idempotencyKey: string,
  ): Promise<TradeResponse> {
    return this.request("POST", `/markets/${marketId}/trades`, {
      outcome,
      spend_cents: spendCents,
      idempotency_key: idempotencyKey,
    });
  }

  getAccount(accountId: string): Promise<AccountView> {
    return this.request("GET", `/accounts/${accountId}`);
  }

  getCurve(assetId: string): Promise<ImpliedCurve> {
    return this.request("GET", `/assets/${assetId}/curve`);
  }

  // admin surface, used by the live walkthrough and operator tooling
  openAccount(accountId?: string): Promise<OpenedAccount> {
    return this.request("POST", "/accounts", { account_id: accountId ?? null });
  }

  adminCreateMarket(body: {
    kind: "binary" | "joint";
    asset_id?: string;
    threshold_cents?: number;
    b?: number;
    cutoff?: number;
    market_a?: string;
    market_b?: string;
  }): Promise<MarketSummary> {
    return this.request("POST", "/admin/markets", body);
  }

  adminSettle(marketId: string, announcedPriceCents: number): Promise<unknown> {
    return this.request("POST", "/admin/settle", {
      market_id: marketId,
      announced_price_cents: announcedPriceCents,
    });
  }
}
