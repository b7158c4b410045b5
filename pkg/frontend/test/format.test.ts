import { describe, expect, it } from "vitest";

import { formatJr, heatColor, roundHalfEven } from "../src/format.js";

describe("roundHalfEven", () => {
  it("rounds exact binary ties to the even neighbor", () => {
    expect(roundHalfEven(0.0625, 3)).toBe(0.062); // 62.5 -> 62
    expect(roundHalfEven(0.1875, 3)).toBe(0.188); // 187.5 -> 188
    expect(roundHalfEven(0.0635, 3)).toBe(0.064); // 63.5 -> 64
  });

  it("resolves decimal-intent ties despite binary representation", () => {
    expect(roundHalfEven(0.4215, 3)).toBe(0.422); // 421.5 -> 422
    expect(roundHalfEven(0.4225, 3)).toBe(0.422); // 422.5 -> 422
  });

  it("rounds non-ties to the nearest", () => {
    expect(roundHalfEven(24 / 57, 3)).toBe(0.421);
    expect(roundHalfEven(0.9994, 3)).toBe(0.999);
    expect(roundHalfEven(0.99951, 3)).toBe(1.0);
  });
});

describe("formatJr", () => {
  it("always shows three decimals", () => {
    expect(formatJr(0)).toBe("0.000");
    expect(formatJr(1)).toBe("1.000");
    expect(formatJr(24 / 57)).toBe("0.421");
    expect(formatJr(64 / 57)).toBe("1.123");
  });
});

describe("heatColor", () => {
  it("pins the scale endpoints", () => {
    expect(heatColor(0)).toBe("rgb(255, 255, 255)");
    expect(heatColor(1)).toBe("rgb(30, 64, 175)");
  });

  it("clamps out-of-range values instead of stretching", () => {
    expect(heatColor(-0.5)).toBe(heatColor(0));
    expect(heatColor(7)).toBe(heatColor(1));
  });

  it("is monotone in between", () => {
    const mid = heatColor(0.5);
    expect(mid).not.toBe(heatColor(0));
    expect(mid).not.toBe(heatColor(1));
  });
});
