/** Minimal deterministic SVG builder: fixed viewport, no timestamps, no ids. */

export const WIDTH = 640;
export const HEIGHT = 480;
export const MARGIN = 56;

export interface Scale {
  (v: number): number;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  return (v: number) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0);
}

function fmt(v: number): string {
  return Number(v.toFixed(3)).toString();
}

export class SvgDoc {
  private parts: string[] = [];

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#555", width = 1, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill = "#1f77b4"): void {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  path(d: string, stroke = "#1f77b4", width = 1.5): void {
    this.parts.push(`<path d="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  polyline(pts: Array<[number, number]>, stroke = "#1f77b4", width = 1.5): void {
    const d = pts.map(([x, y], i) => `${i === 0 ? "M" : "L"}${fmt(x)} ${fmt(y)}`).join(" ");
    this.path(d, stroke, width);
  }

  text(x: number, y: number, content: string, size = 12, anchor = "start"): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="monospace" font-size="${size}" text-anchor="${anchor}">${escapeXml(content)}</text>`,
    );
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
