/**
 * Frame payload decoding: base64 buffers to byte arrays and RGBA pixels.
 *
 * Display is lossless: every output pixel copies a payload byte verbatim
 * (grayscale replication or a fixed palette lookup), never filtered.
 */

import type { SensorEntry } from "./protocol.js";

export function decodeBase64(data: string): Uint8Array {
  if (typeof atob === "function") {
    const bin = atob(data);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  return new Uint8Array(Buffer.from(data, "base64"));
}

/** Fixed palette for semantic category indices (0 = no hit, stays black). */
export const CATEGORY_PALETTE: [number, number, number][] = [
  [0, 0, 0],        // 0: sky / no hit
  [170, 170, 170],  // wall
  [110, 80, 50],    // floor
  [230, 230, 230],  // ceiling
  [200, 140, 60],   // door
  [120, 200, 240],  // window
  [220, 60, 60],    // chair
  [240, 150, 50],   // table
  [160, 60, 160],   // sofa
  [70, 110, 220],   // bed
  [60, 170, 90],    // shelf
  [240, 220, 80],   // lamp
  [90, 200, 200],   // toilet
  [150, 220, 150],  // sink
  [40, 40, 120],    // tv
  [40, 160, 40],    // plant
  [150, 120, 90],   // misc
];

export interface DecodedFrame {
  width: number;
  height: number;
  bytes: Uint8Array; // raw payload bytes, row-major
  rgba: Uint8ClampedArray<ArrayBuffer>; // width*height*4 for putImageData
}

export function decodeFrame(entry: SensorEntry): DecodedFrame {
  const width = entry.width ?? 0;
  const height = entry.height ?? 0;
  const channels = entry.channels ?? 1;
  const bytes = decodeBase64(entry.data as string);
  if (bytes.length !== width * height * channels * (entry.encoding === "float" ? 4 : 1)) {
    throw new Error(
      `frame ${entry.name}: payload ${bytes.length} bytes, expected ` +
      `${width}x${height}x${channels}`,
    );
  }
  const rgba = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
  if (entry.encoding === "float") {
    // Float frames are for programmatic consumers; display normalized.
    const floats = new Float32Array(bytes.buffer, bytes.byteOffset, width * height * channels);
    let max = 1e-9;
    for (const v of floats) max = Math.max(max, Math.abs(v));
    for (let i = 0; i < width * height; i++) {
      const v = Math.round((Math.abs(floats[i * channels]) / max) * 255);
      rgba[i * 4] = v;
      rgba[i * 4 + 1] = v;
      rgba[i * 4 + 2] = v;
      rgba[i * 4 + 3] = 255;
    }
    return { width, height, bytes, rgba };
  }
  for (let i = 0; i < width * height; i++) {
    const v = bytes[i * channels];
    if (entry.kind === "semantic") {
      const [r, g, b] = CATEGORY_PALETTE[v % CATEGORY_PALETTE.length];
      rgba[i * 4] = r;
      rgba[i * 4 + 1] = g;
      rgba[i * 4 + 2] = b;
    } else if (entry.kind === "normal" && channels === 3) {
      rgba[i * 4] = bytes[i * 3];
      rgba[i * 4 + 1] = bytes[i * 3 + 1];
      rgba[i * 4 + 2] = bytes[i * 3 + 2];
    } else {
      rgba[i * 4] = v;
      rgba[i * 4 + 1] = v;
      rgba[i * 4 + 2] = v;
    }
    rgba[i * 4 + 3] = 255;
  }
  return { width, height, bytes, rgba };
}
