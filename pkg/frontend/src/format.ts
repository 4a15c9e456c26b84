/** Display helpers: cents to euro strings, probabilities, countdowns. */

export function euro(cents: number): string {
  const sign = cents < 0 ? "-" : "";
  const abs = Math.abs(cents);
  const whole = Math.floor(abs / 100).toLocaleString("en-IE");
  const frac = String(abs % 100).padStart(2, "0");
  return `${sign}€${whole}.${frac}`;
}

export function percent(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}

/** Parse a user-entered euro amount into integer cents; null if invalid. */
export function parseEuroToCents(text: string): number | null {
  const cleaned = text.trim().replace(/[€,\s]/g, "");
  if (!/^\d+(\.\d{1,2})?$/.test(cleaned)) return null;
  const [whole, frac = ""] = cleaned.split(".");
  return Number(whole) * 100 + Number(frac.padEnd(2, "0") || "0");
}

export function countdown(cutoffEpochSeconds: number, nowMs: number): string {
  const remaining = cutoffEpochSeconds * 1000 - nowMs;
  if (remaining <= 0) return "closed";
  const totalMinutes = Math.floor(remaining / 60_000);
  const days = Math.floor(totalMinutes / 1_440);
  const hours = Math.floor((totalMinutes % 1_440) / 60);
  const minutes = totalMinutes % 60;
  if (days > 0) return `${days}d ${hours}h`;
  if (hours > 0) return `${hours}h ${minutes}m`;
  return `${minutes}m`;
}
