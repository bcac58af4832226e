/** Shared test utilities: deterministic image synthesis and a similarity
 * oracle over emitted descriptor blocks. */

import * as fs from "node:fs";
import * as jpeg from "jpeg-js";
import { PNG } from "pngjs";
import { DESCRIPTOR_BYTES, ImageDescriptors } from "../src/format";

/**
 * Deterministic byte stream (splitmix32). Every output bit has full
 * period, so synthesized noise images carry no repeating texture that
 * distinct seeds could accidentally share.
 */
export function byteStream(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
    z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
    z ^= z >>> 15;
    return (z >>> 24) & 0xff;
  };
}

/**
 * Monochrome noise as RGBA (R=G=B per pixel): survives luma conversion
 * at full contrast, so corner detection sees the sharpest possible
 * texture.
 */
export function noiseRgba(width: number, height: number, seed: number): Buffer {
  const next = byteStream(seed);
  const data = Buffer.alloc(width * height * 4);
  for (let i = 0; i < data.length; i += 4) {
    const v = next();
    data[i] = v;
    data[i + 1] = v;
    data[i + 2] = v;
    data[i + 3] = 255;
  }
  return data;
}

export function writeNoisePng(
  path: string, width: number, height: number, seed: number,
): void {
  const png = new PNG({ width, height });
  noiseRgba(width, height, seed).copy(png.data);
  fs.writeFileSync(path, PNG.sync.write(png));
}

export function writeFlatPng(
  path: string, width: number, height: number, value: number,
): void {
  const png = new PNG({ width, height });
  for (let i = 0; i < png.data.length; i += 4) {
    png.data[i] = value;
    png.data[i + 1] = value;
    png.data[i + 2] = value;
    png.data[i + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png));
}

export function writeNoiseJpeg(
  path: string, width: number, height: number, seed: number, quality = 90,
): void {
  const encoded = jpeg.encode(
    { data: noiseRgba(width, height, seed), width, height }, quality);
  fs.writeFileSync(path, encoded.data);
}

export function writePgm(
  path: string, width: number, height: number, gray: Uint8Array,
  headerExtras = "",
): void {
  const header = Buffer.from(`P5\n${headerExtras}${width} ${height}\n255\n`, "ascii");
  fs.writeFileSync(path, Buffer.concat([header, Buffer.from(gray)]));
}

export function writePpm(
  path: string, width: number, height: number, rgb: Uint8Array,
): void {
  const header = Buffer.from(`P6\n${width} ${height}\n255\n`, "ascii");
  fs.writeFileSync(path, Buffer.concat([header, Buffer.from(rgb)]));
}

const POPCOUNT = new Uint8Array(256);
for (let i = 0; i < 256; i++) {
  POPCOUNT[i] = (i & 1) + POPCOUNT[i >> 1];
}

export function hammingDistance(
  a: Uint8Array, aOffset: number, b: Uint8Array, bOffset: number,
): number {
  let d = 0;
  for (let j = 0; j < DESCRIPTOR_BYTES; j++) {
    d += POPCOUNT[a[aOffset + j] ^ b[bOffset + j]];
  }
  return d;
}

const MATCH_DISTANCE_LIMIT = 60;
const MATCH_SIGMA_SQ = 16 * 16;

/**
 * Definitional pairwise image similarity over raw descriptor blocks:
 * the mean over all cross pairs of exp(-d^2 / sigma^2) for d <= 60,
 * zero beyond the distance limit. Matches the consumer's documented
 * scoring (FORMATS.md / hashloop README).
 */
export function imageSimilarity(
  a: ImageDescriptors, b: ImageDescriptors,
): number {
  const nA = a.length / DESCRIPTOR_BYTES;
  const nB = b.length / DESCRIPTOR_BYTES;
  if (nA === 0 || nB === 0) return 0;
  let total = 0;
  for (let i = 0; i < nA; i++) {
    for (let j = 0; j < nB; j++) {
      const d = hammingDistance(a, i * DESCRIPTOR_BYTES, b, j * DESCRIPTOR_BYTES);
      if (d <= MATCH_DISTANCE_LIMIT) {
        total += Math.exp(-(d * d) / MATCH_SIGMA_SQ);
      }
    }
  }
  return total / (nA * nB);
}
