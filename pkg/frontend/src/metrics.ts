import type { MetricsResult } from "./types.js";

export interface MetricsView {
  state: "ready" | "empty" | "error";
  meanSleepHours: string | null;
  trendPerDay: string | null;
  sparkline: number[];
  activeDayStreak: number;
}

/** Consecutive days with data, counted backwards from the newest point. */
export function computeStreak(series: [string, number][]): number {
  if (series.length === 0) return 0;
  const days = series.map(([d]) => new Date(`${d}T00:00:00Z`).getTime());
  let streak = 1;
  for (let i = days.length - 1; i > 0; i--) {
    if (days[i] - days[i - 1] === 86_400_000) streak++;
    else break;
  }
  return streak;
}

export function buildMetricsView(
  mean: MetricsResult | null,
  trend: MetricsResult | null,
): MetricsView {
  if (mean === null && trend === null) {
    return {
      state: "empty",
      meanSleepHours: null,
      trendPerDay: null,
      sparkline: [],
      activeDayStreak: 0,
    };
  }
  const series = trend?.series ?? [];
  return {
    state: "ready",
    meanSleepHours: mean ? `${mean.value.toFixed(2)} ${mean.unit}` : null,
    trendPerDay: trend
      ? `${trend.value >= 0 ? "+" : ""}${trend.value.toFixed(2)} ${trend.unit}`
      : null,
    sparkline: series.map(([, v]) => v),
    activeDayStreak: computeStreak(series),
  };
}

export function errorMetricsView(): MetricsView {
  return {
    state: "error",
    meanSleepHours: null,
    trendPerDay: null,
    sparkline: [],
    activeDayStreak: 0,
  };
}
