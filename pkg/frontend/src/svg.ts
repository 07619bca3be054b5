// Minimal deterministic SVG chart primitives: no DOM, no randomness, plain strings.

export interface Extent {
  min: number;
  max: number;
}

export type ScaleKind = 'linear' | 'log';

export interface Scale {
  kind: ScaleKind;
  toPixel(value: number): number;
  ticks(): number[];
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { top: 48, right: 168, bottom: 56, left: 76 };

export const PLOT = {
  width: WIDTH,
  height: HEIGHT,
  x0: MARGIN.left,
  x1: WIDTH - MARGIN.right,
  y0: HEIGHT - MARGIN.bottom,
  y1: MARGIN.top,
};

export const PALETTE = [
  '#1f77b4',
  '#ff7f0e',
  '#2ca02c',
  '#d62728',
  '#9467bd',
  '#8c564b',
  '#e377c2',
  '#7f7f7f',
  '#bcbd22',
  '#17becf',
];

function pad(extent: Extent): Extent {
  if (extent.min === extent.max) {
    const bump = extent.min === 0 ? 1 : Math.abs(extent.min) * 0.5;
    return { min: extent.min - bump, max: extent.max + bump };
  }
  return extent;
}

export function linearScale(extent: Extent, pixelLo: number, pixelHi: number): Scale {
  const { min, max } = pad(extent);
  const toPixel = (value: number) => pixelLo + ((value - min) / (max - min)) * (pixelHi - pixelLo);
  return {
    kind: 'linear',
    toPixel,
    ticks: () => {
      const span = max - min;
      const step = Math.pow(10, Math.floor(Math.log10(span / 4)));
      const mult = span / step > 8 ? 2 : 1;
      const ticks: number[] = [];
      const start = Math.ceil(min / (step * mult)) * step * mult;
      for (let v = start; v <= max + 1e-12 * span; v += step * mult) {
        ticks.push(Number(v.toPrecision(12)));
      }
      return ticks;
    },
  };
}

export function logScale(extent: Extent, pixelLo: number, pixelHi: number): Scale {
  if (extent.min <= 0) {
    throw new Error(`log scale requires positive data, got min=${extent.min}`);
  }
  const lo = Math.log10(extent.min);
  const hi = Math.log10(extent.max);
  const { min, max } = pad({ min: lo, max: hi });
  const toPixel = (value: number) => pixelLo + ((Math.log10(value) - min) / (max - min)) * (pixelHi - pixelLo);
  return {
    kind: 'log',
    toPixel,
    ticks: () => {
      const ticks: number[] = [];
      for (let e = Math.ceil(min); e <= Math.floor(max); e += 1) {
        ticks.push(Math.pow(10, e));
      }
      return ticks.length >= 2 ? ticks : [Math.pow(10, min), Math.pow(10, max)];
    },
  };
}

export function fmtTick(value: number): string {
  if (value === 0) return '0';
  const abs = Math.abs(value);
  if (abs >= 1e4 || abs < 1e-3) return value.toExponential(0).replace('e+', 'e');
  return String(Number(value.toPrecision(6)));
}

function escapeText(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export function polyline(points: Array<[number, number]>, color: string): string {
  const coords = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(' ');
  return `<polyline fill="none" stroke="${color}" stroke-width="1.8" points="${coords}"/>`;
}

export function circle(x: number, y: number, color: string): string {
  return `<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="3.2" fill="${color}"/>`;
}

export function text(x: number, y: number, content: string, attrs = ''): string {
  return `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-family="sans-serif" ${attrs}>${escapeText(content)}</text>`;
}

export interface FigureSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
  body: string[];
  legend?: Array<{ label: string; color: string }>;
}

export function renderFigure(spec: FigureSpec): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(text(PLOT.x0, 28, spec.title, 'font-size="16" font-weight="bold"'));

  for (const tick of spec.xScale.ticks()) {
    const px = spec.xScale.toPixel(tick);
    if (px < PLOT.x0 - 0.5 || px > PLOT.x1 + 0.5) continue;
    parts.push(`<line x1="${px.toFixed(2)}" y1="${PLOT.y0}" x2="${px.toFixed(2)}" y2="${PLOT.y1}" stroke="#dddddd"/>`);
    parts.push(text(px - 12, PLOT.y0 + 18, fmtTick(tick), 'font-size="11"'));
  }
  for (const tick of spec.yScale.ticks()) {
    const py = spec.yScale.toPixel(tick);
    if (py > PLOT.y0 + 0.5 || py < PLOT.y1 - 0.5) continue;
    parts.push(`<line x1="${PLOT.x0}" y1="${py.toFixed(2)}" x2="${PLOT.x1}" y2="${py.toFixed(2)}" stroke="#dddddd"/>`);
    parts.push(text(PLOT.x0 - 58, py + 4, fmtTick(tick), 'font-size="11"'));
  }
  parts.push(
    `<line x1="${PLOT.x0}" y1="${PLOT.y0}" x2="${PLOT.x1}" y2="${PLOT.y0}" stroke="black"/>`,
    `<line x1="${PLOT.x0}" y1="${PLOT.y0}" x2="${PLOT.x0}" y2="${PLOT.y1}" stroke="black"/>`,
  );
  parts.push(text((PLOT.x0 + PLOT.x1) / 2 - 30, HEIGHT - 14, spec.xLabel, 'font-size="13"'));
  parts.push(
    `<text x="20" y="${(PLOT.y0 + PLOT.y1) / 2}" font-family="sans-serif" font-size="13" transform="rotate(-90 20 ${
      (PLOT.y0 + PLOT.y1) / 2
    })">${escapeText(spec.yLabel)}</text>`,
  );

  parts.push(...spec.body);

  if (spec.legend) {
    let ly = PLOT.y1 + 8;
    for (const entry of spec.legend) {
      const lx = PLOT.x1 + 14;
      parts.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${entry.color}" stroke-width="2"/>`);
      parts.push(text(lx + 28, ly + 4, entry.label, 'font-size="12" class="legend-label"'));
      ly += 20;
    }
  }
  parts.push('</svg>');
  return parts.join('\n') + '\n';
}
