import numpy as np

SVG_WIDTH = 480
SVG_HEIGHT = 320
MARGIN = 40


def _fmt(x):
  return f"{float(x):.10e}"


def _scale(values, lower, upper):
  values = np.asarray(values, dtype=np.float64)
  lo, hi = float(np.min(values)), float(np.max(values))
  if hi == lo:
    return np.full(values.shape, (lower + upper) / 2)
  return lower + (values - lo) / (hi - lo) * (upper - lower)


class ReportTemplate:

  @classmethod
  def csv(cls, header, rows):
    lines = [",".join(header)]
    for row in rows:
      lines.append(",".join(
          v if isinstance(v, str) else _fmt(v) for v in row))
    return "\n".join(lines) + "\n"

  @classmethod
  def field_csv(cls, x, t, values):
    """Long-format samples, one (x, t, Re, Im) row per node, x fastest."""
    values = np.asarray(values)
    rows = []
    for j, tj in enumerate(t):
      for i, xi in enumerate(x):
        z = complex(values[i, j])
        rows.append((xi, tj, z.real, z.imag))
    return cls.csv(("x", "t", "re", "im"), rows)

  @classmethod
  def traces_csv(cls, t, traces):
    names = sorted(traces)
    rows = [[tj] + [float(np.real(traces[n][j])) for n in names]
            for j, tj in enumerate(t)]
    return cls.csv(["t"] + names, rows)

  @classmethod
  def svg_head(cls, title):
    return f'''<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">
<title>{title}</title>
<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>
<text x="{MARGIN}" y="{MARGIN // 2}" font-size="12">{title}</text>
'''

  @classmethod
  def line(cls, title, x, y):
    px = _scale(x, MARGIN, SVG_WIDTH - MARGIN)
    py = _scale(y, SVG_HEIGHT - MARGIN, MARGIN)
    points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    return f'''{cls.svg_head(title)}<polyline fill="none" stroke="black" stroke-width="1" points="{points}"/>
</svg>
'''

  @classmethod
  def heatmap(cls, title, values, cells=64):
    """Magnitude heatmap, x down the rows, t along the columns."""
    magnitude = np.abs(np.asarray(values))
    rows = np.linspace(0, magnitude.shape[0] - 1, cells).astype(int)
    cols = np.linspace(0, magnitude.shape[1] - 1, cells).astype(int)
    sampled = magnitude[np.ix_(rows, cols)]
    peak = float(sampled.max()) or 1.0
    width = (SVG_WIDTH - 2 * MARGIN) / cells
    height = (SVG_HEIGHT - 2 * MARGIN) / cells
    rects = []
    for i in range(cells):
      for j in range(cells):
        shade = int(255 * (1 - sampled[i, j] / peak))
        rects.append(
            f'<rect x="{MARGIN + j * width:.2f}" y="{MARGIN + i * height:.2f}" '
            f'width="{width:.2f}" height="{height:.2f}" '
            f'fill="rgb({shade},{shade},255)"/>')
    body = "\n".join(rects)
    return f'''{cls.svg_head(title)}{body}
</svg>
'''
