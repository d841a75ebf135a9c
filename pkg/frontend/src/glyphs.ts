/** Sphere glyph sizing for nodal solution values. */

/** Fraction of the maximum radius kept for the smallest spheres. */
export const RADIUS_FLOOR_FRACTION = 0.02;

/**
 * Radius of the sphere for one nodal value.
 *
 * Linear in the value: rMax * (value - min) / (max - min), clamped to
 * [0.02 * rMax, rMax] so zero-value nodes stay visible.  A degenerate
 * range (min === max) yields the floor radius.
 */
export function sphereRadius(
  value: number,
  min: number,
  max: number,
  rMax: number,
): number {
  if (!(rMax > 0)) {
    throw new RangeError(`rMax must be positive, got ${rMax}`);
  }
  if (!(max >= min)) {
    throw new RangeError(`max (${max}) must be >= min (${min})`);
  }
  const floor = RADIUS_FLOOR_FRACTION * rMax;
  if (max === min) {
    return floor;
  }
  const radius = (rMax * (value - min)) / (max - min);
  return Math.min(rMax, Math.max(floor, radius));
}
