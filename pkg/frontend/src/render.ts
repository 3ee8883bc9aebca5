import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import * as echarts from "echarts";
import { readCsv } from "./csv";
import { FigureJob, buildOption } from "./figures";

export interface RenderResult {
  outputImage: string;
  svg: string;
}

/** Read the job's CSV, build the figure, write one SVG file. */
export function renderFigure(job: FigureJob, width = 900, height = 560): RenderResult {
  const table = readCsv(job.inputCsv);
  const option = buildOption(job, table);
  const chart = echarts.init(null, null, { renderer: "svg", ssr: true, width, height });
  try {
    chart.setOption(option);
    const svg = chart.renderToSVGString();
    mkdirSync(dirname(job.outputImage), { recursive: true });
    writeFileSync(job.outputImage, svg);
    return { outputImage: job.outputImage, svg };
  } finally {
    chart.dispose();
  }
}
