/**
 * Minimal deterministic SVG chart toolkit: linear/log scales, axes, series.
 * Output depends only on the input data, so identical inputs render
 * identical bytes.
 */

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN: Margin = { top: 40, right: 160, bottom: 56, left: 64 };

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#ff7f0e",
  "#9467bd",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

export interface Scale {
  (value: number): number;
  ticks(): number[];
}

function span(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

export function linearScale(values: number[], range: [number, number], tickCount = 6): Scale {
  const [lo, hi] = span(values);
  const scale = ((value: number) =>
    range[0] + ((value - lo) / (hi - lo)) * (range[1] - range[0])) as Scale;
  scale.ticks = () => {
    const step = (hi - lo) / (tickCount - 1);
    return Array.from({ length: tickCount }, (_, i) => lo + i * step);
  };
  return scale;
}

export function logScale(values: number[], range: [number, number]): Scale {
  const positives = values.filter((v) => v > 0);
  const [lo, hi] = span(positives.map(Math.log10));
  const scale = ((value: number) =>
    range[0] + ((Math.log10(value) - lo) / (hi - lo)) * (range[1] - range[0])) as Scale;
  scale.ticks = () => {
    const ticks: number[] = [];
    for (let e = Math.floor(lo); e <= Math.ceil(hi); e += 1) {
      ticks.push(10 ** e);
    }
    return ticks;
  };
  return scale;
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const fmt = (value: number): string => {
  const rounded = Number(value.toPrecision(4));
  return String(rounded);
};

export class SvgChart {
  private parts: string[] = [];

  constructor(
    readonly title: string,
    readonly xLabel: string,
    readonly yLabel: string,
  ) {}

  get plotLeft(): number {
    return MARGIN.left;
  }

  get plotRight(): number {
    return WIDTH - MARGIN.right;
  }

  get plotTop(): number {
    return MARGIN.top;
  }

  get plotBottom(): number {
    return HEIGHT - MARGIN.bottom;
  }

  axes(x: Scale, y: Scale, options: { xFormat?: (v: number) => string } = {}): void {
    const xFormat = options.xFormat ?? fmt;
    const axisStyle = 'stroke="#333" stroke-width="1"';
    this.parts.push(
      `<line x1="${this.plotLeft}" y1="${this.plotBottom}" x2="${this.plotRight}" y2="${this.plotBottom}" ${axisStyle}/>`,
      `<line x1="${this.plotLeft}" y1="${this.plotTop}" x2="${this.plotLeft}" y2="${this.plotBottom}" ${axisStyle}/>`,
    );
    for (const tick of x.ticks()) {
      const px = x(tick);
      this.parts.push(
        `<line x1="${fmt(px)}" y1="${this.plotBottom}" x2="${fmt(px)}" y2="${this.plotBottom + 5}" ${axisStyle}/>`,
        `<text x="${fmt(px)}" y="${this.plotBottom + 20}" font-size="12" text-anchor="middle">${escapeXml(xFormat(tick))}</text>`,
      );
    }
    for (const tick of y.ticks()) {
      const py = y(tick);
      this.parts.push(
        `<line x1="${this.plotLeft - 5}" y1="${fmt(py)}" x2="${this.plotLeft}" y2="${fmt(py)}" ${axisStyle}/>`,
        `<text x="${this.plotLeft - 9}" y="${fmt(py + 4)}" font-size="12" text-anchor="end">${escapeXml(fmt(tick))}</text>`,
      );
    }
  }

  line(
    points: Array<[number, number]>,
    color: string,
    options: { dashed?: boolean; markers?: boolean } = {},
  ): void {
    const path = points.map(([px, py]) => `${fmt(px)},${fmt(py)}`).join(" ");
    const dash = options.dashed ? ' stroke-dasharray="6 4"' : "";
    this.parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="2"${dash} points="${path}"/>`,
    );
    if (options.markers ?? true) {
      for (const [px, py] of points) {
        this.parts.push(`<circle cx="${fmt(px)}" cy="${fmt(py)}" r="3" fill="${color}"/>`);
      }
    }
  }

  bar(x: number, y: number, width: number, height: number, color: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(width)}" height="${fmt(height)}" fill="${color}"/>`,
    );
  }

  legend(entries: Array<{ label: string; color: string; dashed?: boolean }>): void {
    const x = this.plotRight + 12;
    entries.forEach((entry, i) => {
      const y = this.plotTop + 10 + i * 20;
      const dash = entry.dashed ? ' stroke-dasharray="6 4"' : "";
      this.parts.push(
        `<line x1="${x}" y1="${y}" x2="${x + 22}" y2="${y}" stroke="${entry.color}" stroke-width="2"${dash}/>`,
        `<text x="${x + 28}" y="${y + 4}" font-size="12">${escapeXml(entry.label)}</text>`,
      );
    });
  }

  render(): string {
    const centerX = (this.plotLeft + this.plotRight) / 2;
    const centerY = (this.plotTop + this.plotBottom) / 2;
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      `<text x="${centerX}" y="22" font-size="16" text-anchor="middle" font-weight="bold">${escapeXml(this.title)}</text>`,
      `<text x="${centerX}" y="${HEIGHT - 14}" font-size="13" text-anchor="middle">${escapeXml(this.xLabel)}</text>`,
      `<text x="18" y="${centerY}" font-size="13" text-anchor="middle" transform="rotate(-90 18 ${centerY})">${escapeXml(this.yLabel)}</text>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}
