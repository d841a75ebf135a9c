/** Solution value coloring: a linear HSV ramp from blue through green to red. */

export type Rgb = [number, number, number];

/**
 * Map a value in [min, max] to an RGB triple (0..255 integers).
 *
 * The hue runs linearly from 240 degrees (pure blue) at the minimum to
 * 0 degrees (pure red) at the maximum, passing through green at the
 * midpoint.  Values outside the range clamp to the endpoints, and a
 * degenerate range (min === max) maps everything to blue.
 */
export function colorMap(value: number, min: number, max: number): Rgb {
  if (!(max >= min)) {
    throw new RangeError(`max (${max}) must be >= min (${min})`);
  }
  const t = max === min ? 0 : clamp01((value - min) / (max - min));
  return hueToRgb(240 * (1 - t));
}

function clamp01(t: number): number {
  return Math.min(1, Math.max(0, t));
}

/** Convert a fully saturated, full-value HSV hue (degrees) to RGB bytes. */
function hueToRgb(hue: number): Rgb {
  const sector = hue / 60;
  const x = 1 - Math.abs((sector % 2) - 1);
  let rgb: [number, number, number];
  if (sector < 1) rgb = [1, x, 0];
  else if (sector < 2) rgb = [x, 1, 0];
  else if (sector < 3) rgb = [0, 1, x];
  else if (sector < 4) rgb = [0, x, 1];
  else if (sector < 5) rgb = [x, 0, 1];
  else rgb = [1, 0, x];
  return [Math.round(255 * rgb[0]), Math.round(255 * rgb[1]), Math.round(255 * rgb[2])];
}
