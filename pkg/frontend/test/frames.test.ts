import { describe, expect, it } from "vitest";

import { CATEGORY_PALETTE, decodeBase64, decodeFrame } from "../src/frames.js";
import type { SensorEntry } from "../src/protocol.js";

function b64(bytes: number[] | Uint8Array): string {
  return Buffer.from(Uint8Array.from(bytes)).toString("base64");
}

function entry(partial: Partial<SensorEntry>): SensorEntry {
  return {
    name: "f",
    kind: "depth",
    data: "",
    width: 2,
    height: 2,
    channels: 1,
    encoding: "byte",
    ...partial,
  };
}

describe("frame decoding", () => {
  it("decodes base64 to the exact payload bytes", () => {
    const bytes = [0, 1, 127, 128, 254, 255];
    expect(Array.from(decodeBase64(b64(bytes)))).toEqual(bytes);
  });

  it("grayscale pixels replicate payload bytes exactly", () => {
    const payload = [10, 200, 0, 255];
    const frame = decodeFrame(entry({ data: b64(payload) }));
    expect(Array.from(frame.bytes)).toEqual(payload);
    for (let i = 0; i < 4; i++) {
      expect(frame.rgba[i * 4]).toBe(payload[i]);
      expect(frame.rgba[i * 4 + 1]).toBe(payload[i]);
      expect(frame.rgba[i * 4 + 2]).toBe(payload[i]);
      expect(frame.rgba[i * 4 + 3]).toBe(255);
    }
  });

  it("semantic frames use the fixed category palette", () => {
    const payload = [0, 1, 4, 16];
    const frame = decodeFrame(entry({ kind: "semantic", data: b64(payload) }));
    for (let i = 0; i < payload.length; i++) {
      const [r, g, b] = CATEGORY_PALETTE[payload[i]];
      expect([frame.rgba[i * 4], frame.rgba[i * 4 + 1], frame.rgba[i * 4 + 2]])
        .toEqual([r, g, b]);
    }
  });

  it("normal frames map three channels straight through", () => {
    const payload = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120];
    const frame = decodeFrame(entry({
      kind: "normal", data: b64(payload), width: 2, height: 2, channels: 3,
    }));
    expect([frame.rgba[0], frame.rgba[1], frame.rgba[2]]).toEqual([10, 20, 30]);
    expect([frame.rgba[4], frame.rgba[5], frame.rgba[6]]).toEqual([40, 50, 60]);
  });

  it("rejects frames whose payload size disagrees with the header", () => {
    expect(() => decodeFrame(entry({ data: b64([1, 2, 3]) }))).toThrow(/payload/);
  });

  it("float frames decode with the right byte width", () => {
    const floats = new Float32Array([0.5, 1.0, 2.0, 10.0]);
    const frame = decodeFrame(entry({
      encoding: "float",
      data: Buffer.from(new Uint8Array(floats.buffer)).toString("base64"),
    }));
    expect(frame.bytes.length).toBe(16);
    expect(frame.rgba[3]).toBe(255);
  });
});
