/**
 * Portfolio & settlement view: balance, positions, wagered vs cap,
 * payouts after resolution, and the implied exceedance curve rendered
 * as a step chart. All figures come straight from service responses.
 */

import { ApiClient, AccountView, CurvePoint, MarketSummary } from "./api.js";

export interface PositionRow {
  marketId: string;
  outcome: string;
  shares: number;
  wageredCents: number;
  remainingCapCents: number;
  state: string;
  settled: boolean;
  winningOutcome: string | null;
}

export interface StepPoint {
  x: number; // threshold cents
  y: number; // P(price > threshold)
}

export class PortfolioView {
  account: AccountView | null = null;

  constructor(private readonly api: ApiClient, readonly accountId: string) {}

  async refresh(): Promise<void> {
    this.account = await this.api.getAccount(this.accountId);
  }

  get balanceCents(): number {
    return this.account?.balance_cents ?? 0;
  }

  get isEmpty(): boolean {
    return this.account !== null && Object.keys(this.account.positions).length === 0;
  }

  rows(markets: Map<string, MarketSummary>): PositionRow[] {
    if (this.account === null) return [];
    const out: PositionRow[] = [];
    for (const [marketId, byOutcome] of Object.entries(this.account.positions)) {
      const market = markets.get(marketId);
      for (const [outcome, shares] of Object.entries(byOutcome)) {
        if (shares <= 0) continue;
        out.push({
          marketId,
          outcome,
          shares,
          wageredCents: this.account.wagered_cents[marketId] ?? 0,
          remainingCapCents:
            this.account.remaining_cap_cents[marketId] ?? this.account.wager_cap_cents,
          state: market?.state ?? "UNKNOWN",
          settled: market?.state === "SETTLED",
          winningOutcome: market?.resolution?.winning_outcome ?? null,
        });
      }
    }
    out.sort((a, b) => a.marketId.localeCompare(b.marketId) || a.outcome.localeCompare(b.outcome));
    return out;
  }

  payouts(): AccountView["payouts"] {
    return this.account?.payouts ?? [];
  }

  totalPayoutCents(): number {
    return this.payouts().reduce((sum, p) => sum + p.payout_cents, 0);
  }

  async curveSteps(assetId: string): Promise<StepPoint[]> {
    const curve = await this.api.getCurve(assetId);
    return toStepPoints(curve.points);
  }
}

/**
 * Expand curve points into step-chart vertices: hold each probability
 * level until the next threshold. Pure display geometry; the
 * probabilities themselves are untouched service values.
 */
export function toStepPoints(points: CurvePoint[]): StepPoint[] {
  const steps: StepPoint[] = [];
  for (let i = 0; i < points.length; i++) {
    const point = points[i]!;
    steps.push({ x: point.threshold_cents, y: point.p_higher });
    const next = points[i + 1];
    if (next) steps.push({ x: next.threshold_cents, y: point.p_higher });
  }
  return steps;
}
