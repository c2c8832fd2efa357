/**
 * The five figure kinds renderable from cellwatch result tables.
 *
 * Each renderer validates its input schema (naming any missing columns) and
 * returns an SVG document string.
 */

import { Table, TableError, distinct, numericColumn, requireColumns } from "./csv.js";
import { PALETTE, SvgChart, linearScale, logScale } from "./svg.js";

export type ChartKind =
  | "visit-share-bars"
  | "auc-vs-xi"
  | "performance-cloud"
  | "density-tradeoff"
  | "coverage-curve";

export const CHART_KINDS: ChartKind[] = [
  "visit-share-bars",
  "auc-vs-xi",
  "performance-cloud",
  "density-tradeoff",
  "coverage-curve",
];

function rowsWhere(table: Table, column: string, value: string): Table {
  return { ...table, rows: table.rows.filter((row) => row[column] === value) };
}

function color(i: number): string {
  return PALETTE[i % PALETTE.length] ?? "#000";
}

/** Average visit-time share per site rank (most visited first). */
export function visitShareBars(table: Table): string {
  requireColumns(table, ["rank", "mean_share"]);
  const ranks = numericColumn(table, "rank");
  const shares = numericColumn(table, "mean_share");
  const chart = new SvgChart(
    "Distribution of visit time by site importance",
    "Site order of importance",
    "Average share of visit time",
  );
  const shown = Math.min(ranks.length, 30); // tail ranks carry no visible mass
  const x = linearScale([0, shown + 1], [chart.plotLeft, chart.plotRight], Math.min(shown + 2, 8));
  const y = linearScale([0, Math.max(...shares)], [chart.plotBottom, chart.plotTop]);
  chart.axes(x, y, { xFormat: (v) => String(Math.round(v)) });
  const slot = (chart.plotRight - chart.plotLeft) / (shown + 1);
  for (let i = 0; i < shown; i += 1) {
    const share = shares[i] ?? 0;
    const cx = x((ranks[i] ?? i + 1));
    chart.bar(cx - slot * 0.35, y(share), slot * 0.7, chart.plotBottom - y(share), color(0));
  }
  return chart.render();
}

/** Detection AUC against the attribution threshold, one curve per tolerance mean. */
export function aucVsXi(table: Table): string {
  requireColumns(table, ["xi", "mu", "auc_mean"]);
  const chart = new SvgChart(
    "Detection AUC vs attribution threshold",
    "xi",
    "AUC",
  );
  const xi = numericColumn(table, "xi");
  const auc = numericColumn(table, "auc_mean");
  const x = linearScale(xi, [chart.plotLeft, chart.plotRight]);
  const y = linearScale([0, Math.max(1, ...auc)], [chart.plotBottom, chart.plotTop]);
  chart.axes(x, y);
  const series = distinct(table, "mu");
  series.forEach((mu, i) => {
    const sub = rowsWhere(table, "mu", mu);
    const points = sub.rows
      .map((row) => [Number(row["xi"]), Number(row["auc_mean"])] as [number, number])
      .sort((a, b) => a[0] - b[0])
      .map(([vx, vy]) => [x(vx), y(vy)] as [number, number]);
    chart.line(points, color(i));
  });
  chart.legend(series.map((mu, i) => ({ label: `mu=${mu}`, color: color(i) })));
  return chart.render();
}

/** Recall at omega per classifier working point: TPR on the abscissa, one curve per FPR. */
export function performanceCloud(table: Table): string {
  requireColumns(table, ["fpr", "tpr", "r_at_omega_mean"]);
  const chart = new SvgChart(
    "Detection recall vs classifier working point",
    "TPR",
    "R@Omega",
  );
  const tpr = numericColumn(table, "tpr");
  const recall = numericColumn(table, "r_at_omega_mean");
  const x = linearScale([0, Math.max(...tpr)], [chart.plotLeft, chart.plotRight]);
  const y = linearScale([0, Math.max(1, ...recall)], [chart.plotBottom, chart.plotTop]);
  chart.axes(x, y);
  const series = distinct(table, "fpr").sort((a, b) => Number(a) - Number(b));
  series.forEach((fpr, i) => {
    const sub = rowsWhere(table, "fpr", fpr);
    const points = sub.rows
      .map((row) => [Number(row["tpr"]), Number(row["r_at_omega_mean"])] as [number, number])
      .sort((a, b) => a[0] - b[0])
      .map(([vx, vy]) => [x(vx), y(vy)] as [number, number]);
    chart.line(points, color(i));
  });
  chart.legend(series.map((fpr, i) => ({ label: `FPR=${fpr}`, color: color(i) })));
  return chart.render();
}

/** Ground-truth-only vs best-classifier recall across survey density. */
export function densityTradeoff(table: Table): string {
  requireColumns(table, ["gt_users_per_site", "strategy", "r_gt_at_omega", "r_c_at_omega"]);
  const chart = new SvgChart(
    "To predict or not: recall vs ground-truth density",
    "GT users per site",
    "R@Omega",
  );
  const density = numericColumn(table, "gt_users_per_site");
  const values = [
    ...numericColumn(table, "r_gt_at_omega"),
    ...numericColumn(table, "r_c_at_omega"),
  ];
  const x = logScale(density, [chart.plotLeft, chart.plotRight]);
  const y = linearScale([0, Math.max(1, ...values)], [chart.plotBottom, chart.plotTop]);
  chart.axes(x, y, { xFormat: (v) => String(v) });
  const strategies = distinct(table, "strategy");
  const legend: Array<{ label: string; color: string; dashed?: boolean }> = [];
  strategies.forEach((strategy, i) => {
    const sub = rowsWhere(table, "strategy", strategy);
    const ordered = sub.rows
      .map((row) => ({
        d: Number(row["gt_users_per_site"]),
        gt: Number(row["r_gt_at_omega"]),
        cls: Number(row["r_c_at_omega"]),
      }))
      .sort((a, b) => a.d - b.d);
    chart.line(ordered.map((p) => [x(p.d), y(p.gt)] as [number, number]), color(i));
    chart.line(ordered.map((p) => [x(p.d), y(p.cls)] as [number, number]), color(i), {
      dashed: true,
    });
    legend.push({ label: `${strategy}: GT only`, color: color(i) });
    legend.push({ label: `${strategy}: classifier`, color: color(i), dashed: true });
  });
  chart.legend(legend);
  return chart.render();
}

/** Network coverage across survey density, one curve per delivery strategy. */
export function coverageCurve(table: Table): string {
  requireColumns(table, ["gt_users_per_site", "strategy", "coverage"]);
  const chart = new SvgChart(
    "Network coverage vs ground-truth density",
    "GT users per site",
    "Network coverage",
  );
  const density = numericColumn(table, "gt_users_per_site");
  const coverage = numericColumn(table, "coverage");
  const x = logScale(density, [chart.plotLeft, chart.plotRight]);
  const y = linearScale([0, Math.max(...coverage, 0.01)], [chart.plotBottom, chart.plotTop]);
  chart.axes(x, y, { xFormat: (v) => String(v) });
  const strategies = distinct(table, "strategy");
  strategies.forEach((strategy, i) => {
    const sub = rowsWhere(table, "strategy", strategy);
    const points = sub.rows
      .map((row) => [Number(row["gt_users_per_site"]), Number(row["coverage"])] as [number, number])
      .sort((a, b) => a[0] - b[0])
      .map(([vx, vy]) => [x(vx), y(vy)] as [number, number]);
    chart.line(points, color(i));
  });
  chart.legend(strategies.map((strategy, i) => ({ label: strategy, color: color(i) })));
  return chart.render();
}

const RENDERERS: Record<ChartKind, (table: Table) => string> = {
  "visit-share-bars": visitShareBars,
  "auc-vs-xi": aucVsXi,
  "performance-cloud": performanceCloud,
  "density-tradeoff": densityTradeoff,
  "coverage-curve": coverageCurve,
};

export function renderChart(kind: string, table: Table): string {
  const renderer = RENDERERS[kind as ChartKind];
  if (!renderer) {
    throw new TableError(
      `unknown chart kind ${JSON.stringify(kind)}; expected one of ${CHART_KINDS.join(", ")}`,
    );
  }
  return renderer(table);
}
