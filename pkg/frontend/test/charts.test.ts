import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

import { CHART_KINDS, renderChart } from "../src/charts.js";
import { TableError, parseTable } from "../src/csv.js";

// Tables produced by the simulation package's acceptance runs.
const RESULTS = join(
  dirname(fileURLToPath(import.meta.url)),
  "..",
  "..",
  "..",
  "results",
  "acceptance",
);

const FIXTURES: Record<string, string> = {
  "visit-share-bars": "visit_shares_s1.csv",
  "auc-vs-xi": "auc_vs_xi.csv",
  "performance-cloud": "performance_cloud.csv",
  "density-tradeoff": "density_tradeoff.csv",
  "coverage-curve": "density_tradeoff.csv",
};

function loadFixture(name: string) {
  return parseTable(readFileSync(join(RESULTS, name), "utf8"));
}

for (const kind of CHART_KINDS) {
  test(`renders ${kind} from the acceptance tables`, () => {
    const svg = renderChart(kind, loadFixture(FIXTURES[kind]!));
    assert.ok(svg.startsWith("<svg"));
    assert.ok(svg.endsWith("</svg>"));
    assert.match(svg, /<polyline|<rect/);
  });
}

test("visit-share bars label the importance axes", () => {
  const svg = renderChart("visit-share-bars", loadFixture("visit_shares_s1.csv"));
  assert.match(svg, /Site order of importance/);
  assert.match(svg, /Average share of visit time/);
});

test("auc-vs-xi draws one curve per mu", () => {
  const table = loadFixture("auc_vs_xi.csv");
  const svg = renderChart("auc-vs-xi", table);
  const muValues = new Set(table.rows.map((row) => row["mu"]));
  const curves = (svg.match(/<polyline/g) ?? []).length;
  assert.equal(curves, muValues.size);
  assert.match(svg, />xi</);
  assert.match(svg, />AUC</);
});

test("performance cloud puts TPR on the abscissa with one curve per FPR", () => {
  const table = loadFixture("performance_cloud.csv");
  const svg = renderChart("performance-cloud", table);
  const fprValues = new Set(table.rows.map((row) => row["fpr"]));
  const curves = (svg.match(/<polyline/g) ?? []).length;
  assert.equal(curves, fprValues.size);
  assert.match(svg, />TPR</);
  assert.match(svg, /R@Omega/);
});

test("density tradeoff draws solid gt and dashed classifier lines per strategy", () => {
  const table = loadFixture("density_tradeoff.csv");
  const svg = renderChart("density-tradeoff", table);
  const strategies = new Set(table.rows.map((row) => row["strategy"]));
  const curves = (svg.match(/<polyline/g) ?? []).length;
  assert.equal(curves, strategies.size * 2);
  const dashed = (svg.match(/stroke-dasharray/g) ?? []).length;
  assert.ok(dashed >= strategies.size);
  assert.match(svg, /GT users per site/);
});

test("coverage curve has one line per strategy", () => {
  const table = loadFixture("density_tradeoff.csv");
  const svg = renderChart("coverage-curve", table);
  const strategies = new Set(table.rows.map((row) => row["strategy"]));
  assert.equal((svg.match(/<polyline/g) ?? []).length, strategies.size);
  assert.match(svg, /Network coverage/);
});

test("identical inputs render identical bytes", () => {
  const table = loadFixture("auc_vs_xi.csv");
  assert.equal(renderChart("auc-vs-xi", table), renderChart("auc-vs-xi", table));
});

test("schema mismatch errors name the missing columns", () => {
  const wrong = parseTable("alpha,beta\n1,2\n");
  assert.throws(() => renderChart("auc-vs-xi", wrong), /missing required columns: xi, mu, auc_mean/);
});

test("empty tables are rejected", () => {
  const empty = parseTable("xi,mu,auc_mean\n");
  assert.throws(() => renderChart("auc-vs-xi", empty), /no data rows/);
});

test("unknown kinds are rejected with the valid list", () => {
  const table = loadFixture("auc_vs_xi.csv");
  assert.throws(() => renderChart("pie", table), TableError);
});
