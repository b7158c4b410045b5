/** Number formatting shared by badges and tables.
 *
 * Badges display the service's jr_value rounded half-even to 3 decimals.
 * The tie test tolerates the binary representation error of decimal
 * inputs (0.4215 arrives as 421.4999... after scaling), so ties resolve
 * the way the decimal value intends.
 */

const TIE_EPS = 1e-9;

export function roundHalfEven(value: number, decimals: number): number {
  const scale = Math.pow(10, decimals);
  const scaled = value * scale;
  const floor = Math.floor(scaled);
  const frac = scaled - floor;
  let units: number;
  if (Math.abs(frac - 0.5) < TIE_EPS) {
    units = floor % 2 === 0 ? floor : floor + 1;
  } else {
    units = frac > 0.5 ? floor + 1 : floor;
  }
  return units / scale;
}

export function formatJr(value: number): string {
  return roundHalfEven(value, 3).toFixed(3);
}

/** Fixed-endpoint color scale on [0, 1]; never data-normalized so heatmaps
 * stay comparable across slates. */
export function heatColor(value: number): string {
  const v = Math.min(1, Math.max(0, value));
  const from = [255, 255, 255];
  const to = [30, 64, 175];
  const mix = from.map((f, i) => Math.round(f + (to[i] - f) * v));
  return `rgb(${mix[0]}, ${mix[1]}, ${mix[2]})`;
}
