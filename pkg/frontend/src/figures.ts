import { BundleError, loadManifest, loadSummary, loadTrace, SummaryRow, TracePoint } from './bundle';
import { circle, linearScale, logScale, PALETTE, PLOT, polyline, renderFigure, Scale, text } from './svg';

export interface Figure {
  svg: string;
  warnings: string[];
  curveLabels: string[];
  yScaleKind: 'linear' | 'log';
}

function meanCurveByEpsilon(bundleDir: string): Map<number, TracePoint[]> {
  const manifest = loadManifest(bundleDir);
  if (manifest.runs.length === 0) {
    throw new BundleError(`bundle ${bundleDir} contains no runs`);
  }
  const traces = new Map<number, TracePoint[][]>();
  for (const run of manifest.runs) {
    const points = loadTrace(bundleDir, run.trace);
    if (points.length === 0) {
      throw new BundleError(`trace ${run.trace} is empty`);
    }
    const group = traces.get(run.epsilon) ?? [];
    group.push(points);
    traces.set(run.epsilon, group);
  }
  const curves = new Map<number, TracePoint[]>();
  for (const [eps, group] of traces) {
    const length = Math.min(...group.map((t) => t.length));
    const mean: TracePoint[] = [];
    for (let i = 0; i < length; i += 1) {
      const sum = group.reduce((acc, t) => acc + t[i].errX, 0);
      mean.push({ k: group[0][i].k, errX: sum / group.length });
    }
    curves.set(eps, mean);
  }
  return curves;
}

export function buildConvergenceFigure(bundleDir: string, linear = false): Figure {
  const curves = meanCurveByEpsilon(bundleDir);
  const epsilons = [...curves.keys()].sort((a, b) => a - b);
  const allPoints = epsilons.flatMap((eps) => curves.get(eps)!);
  const kMax = Math.max(...allPoints.map((p) => p.k));
  const xScale = linearScale({ min: 0, max: kMax }, PLOT.x0, PLOT.x1);

  let yScale: Scale;
  const warnings: string[] = [];
  let values = allPoints.map((p) => p.errX);
  if (linear) {
    yScale = linearScale({ min: Math.min(0, ...values), max: Math.max(...values) }, PLOT.y0, PLOT.y1);
  } else {
    const positive = values.filter((v) => v > 0);
    if (positive.length === 0) {
      throw new BundleError('all err_x values are zero; nothing to draw on a log axis');
    }
    const floor = Math.min(...positive);
    if (positive.length < values.length) {
      warnings.push(`clamped ${values.length - positive.length} zero err_x values to ${floor} for the log axis`);
      values = values.map((v) => (v > 0 ? v : floor));
    }
    yScale = logScale({ min: floor, max: Math.max(...values) }, PLOT.y0, PLOT.y1);
  }

  const body: string[] = [];
  const legend: Array<{ label: string; color: string }> = [];
  const curveLabels: string[] = [];
  epsilons.forEach((eps, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = curves
      .get(eps)!
      .map((p): [number, number] => [
        xScale.toPixel(p.k),
        yScale.toPixel(linear ? p.errX : Math.max(p.errX, Number.MIN_VALUE)),
      ]);
    body.push(polyline(pts, color));
    const label = `eps = ${eps}`;
    legend.push({ label, color });
    curveLabels.push(label);
  });

  const svg = renderFigure({
    title: 'Distance to the optimum vs iteration',
    xLabel: 'iteration k',
    yLabel: linear ? '||x_k - x*||' : '||x_k - x*|| (log scale)',
    xScale,
    yScale,
    body,
    legend,
  });
  return { svg, warnings, curveLabels, yScaleKind: yScale.kind };
}

function conformingRows(rows: SummaryRow[], bundleDir: string): SummaryRow[] {
  const usable = rows.filter((r) => r.gap !== null);
  if (usable.length === 0) {
    throw new BundleError(`bundle ${bundleDir} has no rows with a tightness gap (condition never satisfied)`);
  }
  return usable;
}

export function buildTightnessFigure(bundleDir: string): Figure {
  const rows = conformingRows(loadSummary(bundleDir), bundleDir);
  const warnings: string[] = [];
  for (const row of rows) {
    if ((row.gap as number) < 0) {
      warnings.push(
        `negative gap ${row.gap} at epsilon=${row.epsilon}, seed=${row.seed}: ` +
          'possible soundness violation upstream',
      );
    }
  }
  const byEps = new Map<number, number[]>();
  for (const row of rows) {
    const group = byEps.get(row.epsilon) ?? [];
    group.push(row.gap as number);
    byEps.set(row.epsilon, group);
  }
  const epsilons = [...byEps.keys()].sort((a, b) => a - b);
  const meanGaps = epsilons.map((eps) => {
    const group = byEps.get(eps)!;
    return group.reduce((a, b) => a + b, 0) / group.length;
  });

  const xScale = linearScale({ min: 0, max: Math.max(...epsilons) }, PLOT.x0, PLOT.x1);
  const yScale = linearScale(
    { min: Math.min(0, ...meanGaps), max: Math.max(...meanGaps) },
    PLOT.y0,
    PLOT.y1,
  );
  const body: string[] = [];
  const pts = epsilons.map((eps, i): [number, number] => [xScale.toPixel(eps), yScale.toPixel(meanGaps[i])]);
  body.push(polyline(pts, PALETTE[0]));
  pts.forEach(([x, y]) => body.push(circle(x, y, PALETTE[0])));
  epsilons.forEach((eps, i) => {
    body.push(text(pts[i][0] - 12, pts[i][1] - 8, `eps=${eps}`, 'font-size="10" class="point-label"'));
  });

  const svg = renderFigure({
    title: 'Theoretical bound minus observed steady-state error',
    xLabel: 'oracle accuracy eps',
    yLabel: 'tightness gap',
    xScale,
    yScale,
    body,
  });
  return { svg, warnings, curveLabels: epsilons.map((eps) => `eps=${eps}`), yScaleKind: 'linear' };
}
