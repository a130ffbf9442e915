// Minimal dependency-free SVG line chart for checkpoint series.

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Series {
  label: string;
  color: string;
  points: Array<{ x: number; y: number | null }>;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  yMin?: number;
  yMax?: number;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

/** Render one or more series as polylines; null y-values break the line. */
export function renderLineChart(series: Series[], options: ChartOptions = {}): SVGSVGElement {
  const width = options.width ?? 420;
  const height = options.height ?? 160;
  const pad = 24;
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const xMin = xs.length ? Math.min(...xs) : 0;
  const xMax = xs.length ? Math.max(...xs) : 1;
  const yMin = options.yMin ?? 0;
  const yMax = options.yMax ?? 1;
  const spanX = xMax - xMin || 1;
  const spanY = yMax - yMin || 1;

  const toX = (x: number) => pad + ((x - xMin) / spanX) * (width - 2 * pad);
  const toY = (y: number) => height - pad - ((y - yMin) / spanY) * (height - 2 * pad);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    role: "img",
  });
  svg.appendChild(
    svgEl("rect", {
      x: String(pad),
      y: String(pad),
      width: String(width - 2 * pad),
      height: String(height - 2 * pad),
      fill: "none",
      stroke: "#d6d3d1",
    }),
  );

  for (const s of series) {
    // split on null gaps so rejected-only stretches stay visibly absent
    let run: string[] = [];
    const flush = () => {
      if (run.length > 1) {
        svg.appendChild(
          svgEl("polyline", {
            points: run.join(" "),
            fill: "none",
            stroke: s.color,
            "stroke-width": "2",
            "data-series": s.label,
          }),
        );
      }
      run = [];
    };
    for (const p of s.points) {
      if (p.y === null) {
        flush();
        continue;
      }
      run.push(`${toX(p.x)},${toY(p.y)}`);
      svg.appendChild(
        svgEl("circle", {
          cx: String(toX(p.x)),
          cy: String(toY(p.y)),
          r: "2.5",
          fill: s.color,
          "data-series": s.label,
          "data-x": String(p.x),
          "data-raw": String(p.y),
        }),
      );
    }
    flush();
  }
  return svg;
}
