/**
 * Trade panel: the quote-then-confirm flow.
 *
 * Scoring-rule prices move between render and click, so a wager is a
 * two-step commitment: fetch a quote (shares and post-trade prices come
 * from the service), then confirm. Confirmation re-reads the market and
 * refuses to send if the price moved beyond the displayed tolerance —
 * the user re-quotes instead of being filled at a surprise price.
 *
 * The idempotency key is generated when the quote is taken and rides on
 * the confirmed trade, so a double-click (or a retried request) cannot
 * spend twice.
 */

import { ApiClient, ApiError, MarketSummary, QuoteResponse, TradeResponse } from "./api.js";

export const PRICE_TOLERANCE = 0.01;

export type PanelPhase = "idle" | "quoted" | "executed" | "stale" | "rejected";

export interface PanelSnapshot {
  phase: PanelPhase;
  quote: QuoteResponse | null;
  trade: TradeResponse | null;
  /** remaining per-market allowance to display next to the spend box */
  remainingCapCents: number | null;
  error: string | null;
  /** verbatim 409 body when the service rejected the wager */
  conflictBody: Record<string, unknown> | null;
}

function defaultKeyGen(): string {
  const bytes = new Uint8Array(16);
  if (typeof crypto !== "undefined" && crypto.getRandomValues) {
    crypto.getRandomValues(bytes);
  } else {
    for (let i = 0; i < bytes.length; i++) bytes[i] = Math.floor(Math.random() * 256);
  }
  return [...bytes].map((b) => b.toString(16).padStart(2, "0")).join("");
}

export class TradePanel {
  private phase: PanelPhase = "idle";
  private quote: QuoteResponse | null = null;
  private trade: TradeResponse | null = null;
  private idempotencyKey: string | null = null;
  private quotedPrice: number | null = null;
  private remainingCap: number | null = null;
  private error: string | null = null;
  private conflictBody: Record<string, unknown> | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly market: MarketSummary,
    private readonly keyGen: () => string = defaultKeyGen,
    private readonly tolerance: number = PRICE_TOLERANCE,
  ) {}

  snapshot(): PanelSnapshot {
    return {
      phase: this.phase,
      quote: this.quote,
      trade: this.trade,
      remainingCapCents: this.remainingCap,
      error: this.error,
      conflictBody: this.conflictBody,
    };
  }

  /** Client-side validation before the service is even asked. */
  validateSpend(spendCents: number): string | null {
    if (!Number.isInteger(spendCents) || spendCents <= 0) {
      return "enter a positive spend";
    }
    if (this.market.state !== "OPEN") {
      return `market is ${this.market.state}`;
    }
    return null;
  }

  async requestQuote(outcome: string, spendCents: number): Promise<PanelSnapshot> {
    const invalid = this.validateSpend(spendCents);
    if (invalid) {
      this.error = invalid;
      return this.snapshot();
    }
    this.error = null;
    this.conflictBody = null;
    this.trade = null;
    this.quote = await this.api.getQuote(this.market.market_id, outcome, spendCents);
    this.remainingCap = this.quote.remaining_cap_cents ?? null;
    this.quotedPrice = this.quote.prices_before[outcome] ?? null;
    this.idempotencyKey = this.keyGen();
    this.phase = "quoted";
    return this.snapshot();
  }

  /**
   * Spend exceeding the remaining allowance disables confirm with an
   * explanation instead of bouncing off the service's 409.
   */
  confirmDisabledReason(): string | null {
    if (this.phase !== "quoted" || this.quote === null) return "no quote taken";
    if (
      this.remainingCap !== null &&
      this.quote.spend_cents > this.remainingCap
    ) {
      return `spend exceeds remaining allowance (${this.remainingCap} cents left)`;
    }
    return null;
  }

  async confirm(): Promise<PanelSnapshot> {
    if (this.phase !== "quoted" || this.quote === null || this.idempotencyKey === null) {
      this.error = "nothing to confirm";
      return this.snapshot();
    }
    const disabled = this.confirmDisabledReason();
    if (disabled) {
      this.error = disabled;
      return this.snapshot();
    }
    // stale-price check: refuse to fill if the market moved since the quote
    const fresh = await this.api.getMarket(this.market.market_id);
    const current = fresh.prices[this.quote.outcome];
    if (
      this.quotedPrice !== null &&
      current !== undefined &&
      Math.abs(current - this.quotedPrice) > this.tolerance
    ) {
      this.phase = "stale";
      this.error = "price moved since the quote; take a fresh quote";
      return this.snapshot();
    }
    try {
      this.trade = await this.api.postTrade(
        this.market.market_id,
        this.quote.outcome,
        this.quote.spend_cents,
        this.idempotencyKey,
      );
      this.remainingCap = this.trade.remaining_cap_cents;
      this.phase = "executed";
      this.error = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.phase = "rejected";
        this.conflictBody = err.body;
        this.error = err.message;
      } else {
        throw err;
      }
    }
    return this.snapshot();
  }

  /** After a stale refusal the user starts over with a fresh quote. */
  reset(): void {
    this.phase = "idle";
    this.quote = null;
    this.trade = null;
    this.idempotencyKey = null;
    this.quotedPrice = null;
    this.error = null;
    this.conflictBody = null;
  }
}
