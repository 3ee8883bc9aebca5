import type { EChartsOption, SeriesOption } from "echarts";
import { CsvTable, numericColumn, requireColumns } from "./csv";

export const FIGURE_KINDS = [
  "filter_curves",
  "stepsizes",
  "residual_convergence",
  "ferr_convergence",
  "method_comparison",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureJob {
  inputCsv: string;
  figureKind: FigureKind;
  outputImage: string;
  /** Column family for method_comparison: residual (Er) or objective (Ef). */
  value?: "er" | "ef";
}

function pairs(xs: number[], ys: number[], positiveOnly: boolean): [number, number][] {
  const out: [number, number][] = [];
  for (let i = 0; i < xs.length; i++) {
    const x = xs[i];
    const y = ys[i];
    if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
    if (positiveOnly && y <= 0) continue;
    out.push([x, y]);
  }
  return out;
}

function frame(title: string, xName: string, yName: string, logY: boolean): EChartsOption {
  return {
    animation: false,
    title: { text: title, left: "center" },
    legend: { bottom: 0 },
    grid: { left: 70, right: 30, top: 50, bottom: 60 },
    xAxis: { type: "value", name: xName, nameLocation: "middle", nameGap: 28 },
    yAxis: { type: logY ? "log" : "value", name: yName },
  };
}

function filterCurves(table: CsvTable): EChartsOption {
  requireColumns(table, ["s", "omega_exp", "omega_tik"]);
  const s = numericColumn(table, "s");
  const option = frame("Exponential vs Tikhonov filter", "s", "filter weight", false);
  option.series = [
    { type: "line", name: "exponential 1 - exp(-t s)", showSymbol: false,
      data: pairs(s, numericColumn(table, "omega_exp"), false) },
    { type: "line", name: "Tikhonov s / (s + beta)", showSymbol: false,
      data: pairs(s, numericColumn(table, "omega_tik"), false) },
  ];
  return option;
}

function stepsizes(table: CsvTable): EChartsOption {
  requireColumns(table, ["k", "alpha", "limit"]);
  const k = numericColumn(table, "k");
  const alpha = numericColumn(table, "alpha");
  const limit = numericColumn(table, "limit")[0];
  const option = frame("Step sizes per iteration", "iteration k", "step size", true);
  const line: [number, number][] = [
    [Math.min(...k), limit],
    [Math.max(...k), limit],
  ];
  option.series = [
    { type: "scatter", name: "alpha_k", symbolSize: 4, data: pairs(k, alpha, true) },
    { type: "line", name: "constant-step limit", showSymbol: false,
      lineStyle: { type: "solid", width: 2 }, data: line },
  ];
  return option;
}

function convergence(table: CsvTable, column: string, title: string, yName: string): EChartsOption {
  requireColumns(table, ["k", column]);
  const data = pairs(numericColumn(table, "k"), numericColumn(table, column), true);
  if (data.length === 0) {
    throw new Error(`no positive values in column '${column}' of ${table.path}`);
  }
  const option = frame(title, "iteration k", yName, true);
  option.series = [{ type: "line", name: column, showSymbol: false, data }];
  return option;
}

const COMPARE_METHODS = ["sd", "lsd", "cg", "nes"] as const;

function methodComparison(table: CsvTable, value: "er" | "ef"): EChartsOption {
  const prefix = value === "ef" ? "Ef" : "Er";
  const columns = COMPARE_METHODS.map((m) => `${prefix}_${m}`);
  requireColumns(table, ["k", ...columns]);
  const k = numericColumn(table, "k");
  const yName = value === "ef" ? "objective error (best so far)" : "residual norm (best so far)";
  const option = frame("Method comparison", "iteration k", yName, true);
  const series: SeriesOption[] = COMPARE_METHODS.map((method, i) => ({
    type: "line",
    name: method,
    showSymbol: false,
    data: pairs(k, numericColumn(table, columns[i]), true),
  }));
  option.series = series;
  return option;
}

export function buildOption(job: FigureJob, table: CsvTable): EChartsOption {
  switch (job.figureKind) {
    case "filter_curves":
      return filterCurves(table);
    case "stepsizes":
      return stepsizes(table);
    case "residual_convergence":
      return convergence(table, "rnorm", "Residual convergence", "residual norm");
    case "ferr_convergence":
      return convergence(table, "ferr", "Objective error convergence", "f(x_k) - f(x*)");
    case "method_comparison":
      return methodComparison(table, job.value ?? "er");
    default:
      throw new Error(`unknown figure kind '${job.figureKind as string}'`);
  }
}
