/**
 * DOM wiring. Everything stateful lives in the view-models; this file
 * only renders their snapshots and forwards clicks.
 *
 * Serve the service on :8000, open index.html, paste the account token
 * an operator issued, and trade.
 */

import { ApiClient } from "./api.js";
import { MarketBrowser, POLL_INTERVAL_MS, tradingEnabled } from "./browser.js";
import { countdown, euro, parseEuroToCents, percent } from "./format.js";
import { PortfolioView } from "./portfolio.js";
import { TradePanel } from "./tradePanel.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const api = new ApiClient(
  (window as unknown as { TOXMARKET_URL?: string }).TOXMARKET_URL ?? "http://127.0.0.1:8000",
);
const browser = new MarketBrowser(api);
let panel: TradePanel | null = null;
let portfolio: PortfolioView | null = null;

function setBanner(text: string | null): void {
  const banner = $("banner");
  banner.textContent = text ?? "";
  banner.style.display = text ? "block" : "none";
}

async function refreshAll(): Promise<void> {
  try {
    await browser.refresh(Date.now());
    setBanner(null);
    renderCounties();
  } catch {
    // unreachable service: keep the last view, flag read-only
    setBanner("service unreachable — showing stale data, trading disabled");
  }
  renderMarkets();
  renderStale();
  if (portfolio) {
    await portfolio.refresh().catch(() => undefined);
    renderPortfolio();
  }
}

function renderCounties(): void {
  const select = $("county") as HTMLSelectElement;
  const current = select.value;
  select.innerHTML = `<option value="">all counties</option>`;
  for (const county of browser.counties()) {
    const opt = document.createElement("option");
    opt.value = county;
    opt.textContent = county;
    select.appendChild(opt);
  }
  select.value = current;
}

function renderStale(): void {
  $("stale").style.display = browser.isStale(Date.now()) ? "inline" : "none";
}

function renderMarkets(): void {
  const tbody = $("markets");
  tbody.innerHTML = "";
  if (browser.noAssetsInRange) {
    tbody.innerHTML = `<tr><td colspan="6">no assets in range</td></tr>`;
    return;
  }
  for (const row of browser.rows()) {
    const m = row.market;
    const tr = document.createElement("tr");
    const dist = row.distanceKm !== undefined ? ` (${row.distanceKm.toFixed(1)} km)` : "";
    tr.innerHTML = `
      <td>${row.asset?.title ?? m.market_id}${dist}</td>
      <td>${row.asset?.county ?? ""}</td>
      <td>${m.threshold_cents !== null ? euro(m.threshold_cents) : "joint"}</td>
      <td>${percent(m.prices["HIGHER"] ?? 0)} / ${percent(m.prices["LOWER"] ?? 0)}</td>
      <td>${m.state} · ${countdown(m.cutoff, Date.now())}</td>`;
    const btn = document.createElement("button");
    btn.textContent = "trade";
    btn.disabled = !tradingEnabled(m);
    btn.onclick = () => openPanel(m.market_id);
    const td = document.createElement("td");
    td.appendChild(btn);
    tr.appendChild(td);
    tbody.appendChild(tr);
  }
}

function openPanel(marketId: string): void {
  const market = browser.markets.find((m) => m.market_id === marketId);
  if (!market) return;
  panel = new TradePanel(api, market);
  $("panel-market").textContent =
    `${marketId} — pays €1/share if the transfer price beats ` +
    `${market.threshold_cents !== null ? euro(market.threshold_cents) : "?"}`;
  $("panel").style.display = "block";
  renderPanel();
}

function renderPanel(): void {
  if (!panel) return;
  const snap = panel.snapshot();
  $("panel-error").textContent = snap.error ?? "";
  $("panel-cap").textContent =
    snap.remainingCapCents !== null ? `cap remaining: ${euro(snap.remainingCapCents)}` : "";
  if (snap.conflictBody) {
    $("panel-error").textContent = JSON.stringify(snap.conflictBody);
  }
  if (snap.phase === "quoted" && snap.quote) {
    $("panel-quote").textContent =
      `${snap.quote.shares.toFixed(4)} shares for ${euro(snap.quote.spend_cents)}; ` +
      `price after: ${percent(snap.quote.prices_after[snap.quote.outcome] ?? 0)}`;
    ($("confirm") as HTMLButtonElement).disabled = panel.confirmDisabledReason() !== null;
  } else if (snap.phase === "executed" && snap.trade) {
    $("panel-quote").textContent =
      `executed ${snap.trade.trade_id}: ${snap.trade.shares.toFixed(4)} shares, ` +
      `new price ${percent(snap.trade.prices_after[0] ?? 0)}`;
    ($("confirm") as HTMLButtonElement).disabled = true;
  } else {
    $("panel-quote").textContent = snap.phase === "stale" ? "re-quote to continue" : "";
    ($("confirm") as HTMLButtonElement).disabled = true;
  }
}

function wire(): void {
  $("county").onchange = () => {
    const v = ($("county") as HTMLSelectElement).value;
    browser.setCountyFilter(v || null);
    renderMarkets();
  };
  $("radius-go").onclick = async () => {
    const lat = Number(($("lat") as HTMLInputElement).value);
    const lon = Number(($("lon") as HTMLInputElement).value);
    const km = Number(($("radius") as HTMLInputElement).value);
    if (Number.isFinite(lat) && Number.isFinite(lon) && km > 0) {
      await browser.searchRadius(lat, lon, km);
      renderMarkets();
    }
  };
  $("radius-clear").onclick = () => {
    browser.clearRadius();
    renderMarkets();
  };
  $("quote").onclick = async () => {
    if (!panel) return;
    const spend = parseEuroToCents(($("spend") as HTMLInputElement).value);
    const outcome = ($("outcome") as HTMLSelectElement).value;
    if (spend === null) {
      $("panel-error").textContent = "enter a valid euro amount";
      return;
    }
    await panel.requestQuote(outcome, spend);
    renderPanel();
  };
  $("confirm").onclick = async () => {
    if (!panel) return;
    await panel.confirm();
    renderPanel();
    if (portfolio) await portfolio.refresh().then(renderPortfolio);
  };
  $("requote").onclick = () => {
    panel?.reset();
    renderPanel();
  };
  $("token-go").onclick = async () => {
    const token = ($("token") as HTMLInputElement).value.trim();
    const accountId = ($("account") as HTMLInputElement).value.trim();
    if (!token || !accountId) return;
    api.setToken(token);
    portfolio = new PortfolioView(api, accountId);
    await portfolio.refresh();
    renderPortfolio();
  };
}

function renderPortfolio(): void {
  if (!portfolio || !portfolio.account) return;
  $("balance").textContent = euro(portfolio.balanceCents);
  const markets = new Map(browser.markets.map((m) => [m.market_id, m]));
  const tbody = $("positions");
  tbody.innerHTML = "";
  if (portfolio.isEmpty) {
    tbody.innerHTML = `<tr><td colspan="5">no positions yet</td></tr>`;
  }
  for (const row of portfolio.rows(markets)) {
    const tr = document.createElement("tr");
    const result = row.settled
      ? row.winningOutcome === row.outcome
        ? "won"
        : "lost"
      : row.state;
    tr.innerHTML = `
      <td>${row.marketId}</td><td>${row.outcome}</td>
      <td>${row.shares.toFixed(4)}</td>
      <td>${euro(row.wageredCents)} (left ${euro(row.remainingCapCents)})</td>
      <td>${result}</td>`;
    tbody.appendChild(tr);
  }
  const payouts = $("payouts");
  payouts.innerHTML = "";
  for (const p of portfolio.payouts()) {
    const li = document.createElement("li");
    li.textContent = `${p.market_id}: ${p.shares.toFixed(4)} ${p.outcome} paid ${euro(p.payout_cents)}`;
    payouts.appendChild(li);
  }
}

wire();
void refreshAll();
setInterval(() => void refreshAll(), POLL_INTERVAL_MS);
setInterval(renderStale, 1_000);
