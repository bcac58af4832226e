/**
 * Image decoding for the extractor.
 *
 * Supports PNG and JPEG via pure-JS decoders, plus binary PGM (P5) and
 * PPM (P6), the formats used by common place-recognition image sets.
 * Every decode failure throws an Error whose message explains the defect;
 * callers turn that into a skip entry.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import * as jpeg from "jpeg-js";
import { PNG } from "pngjs";

export interface DecodedImage {
  width: number;
  height: number;
  /** Row-major pixels: RGBA when channels is 4, grayscale when 1. */
  pixels: Uint8Array;
  channels: 1 | 4;
}

/** File extensions treated as dataset images (lower-case, with dot). */
export const IMAGE_EXTENSIONS: readonly string[] = [
  ".png",
  ".jpg",
  ".jpeg",
  ".pgm",
  ".ppm",
];

export function isImageFilename(name: string): boolean {
  return IMAGE_EXTENSIONS.includes(path.extname(name).toLowerCase());
}

export function decodeImageFile(filePath: string): DecodedImage {
  const ext = path.extname(filePath).toLowerCase();
  const bytes = fs.readFileSync(filePath);
  switch (ext) {
    case ".png":
      return decodePng(bytes);
    case ".jpg":
    case ".jpeg":
      return decodeJpeg(bytes);
    case ".pgm":
    case ".ppm":
      return decodePnm(bytes);
    default:
      throw new Error(`unsupported image extension ${ext || "(none)"}`);
  }
}

function decodePng(bytes: Buffer): DecodedImage {
  const png = PNG.sync.read(bytes);
  return {
    width: png.width,
    height: png.height,
    pixels: new Uint8Array(png.data.buffer, png.data.byteOffset, png.data.length),
    channels: 4,
  };
}

function decodeJpeg(bytes: Buffer): DecodedImage {
  const img = jpeg.decode(bytes, { useTArray: true, formatAsRGBA: true });
  return {
    width: img.width,
    height: img.height,
    pixels: img.data,
    channels: 4,
  };
}

/**
 * Decode binary PGM (P5, grayscale) and PPM (P6, RGB) with 8-bit samples.
 *
 * Header tokens may be separated by any whitespace and interleaved with
 * `#` comments; exactly one whitespace byte separates the header from the
 * raster, per the format definition.
 */
function decodePnm(bytes: Buffer): DecodedImage {
  const magic = bytes.toString("ascii", 0, 2);
  if (magic !== "P5" && magic !== "P6") {
    throw new Error(`unsupported PNM magic ${JSON.stringify(magic)}: ` +
      "only binary P5/P6 are supported");
  }
  let pos = 2;

  const isSpace = (b: number) => b === 0x20 || b === 0x09 || b === 0x0a ||
    b === 0x0d || b === 0x0b || b === 0x0c;

  const nextToken = (): number => {
    for (;;) {
      while (pos < bytes.length && isSpace(bytes[pos])) pos++;
      if (pos < bytes.length && bytes[pos] === 0x23) { // '#' comment to EOL
        while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
        continue;
      }
      break;
    }
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos])) pos++;
    if (start === pos) throw new Error("truncated PNM header");
    const value = Number(bytes.toString("ascii", start, pos));
    if (!Number.isInteger(value) || value < 0) {
      throw new Error("malformed PNM header token");
    }
    return value;
  };

  const width = nextToken();
  const height = nextToken();
  const maxval = nextToken();
  if (width === 0 || height === 0) {
    throw new Error(`degenerate PNM dimensions ${width}x${height}`);
  }
  if (maxval <= 0 || maxval > 255) {
    throw new Error(`unsupported PNM maxval ${maxval}: only 8-bit samples`);
  }
  pos += 1; // single whitespace byte before the raster

  const samplesPerPixel = magic === "P5" ? 1 : 3;
  const rasterBytes = width * height * samplesPerPixel;
  if (bytes.length - pos < rasterBytes) {
    throw new Error(`truncated PNM raster: need ${rasterBytes} bytes, ` +
      `have ${bytes.length - pos}`);
  }

  if (magic === "P5") {
    return {
      width,
      height,
      pixels: new Uint8Array(bytes.buffer, bytes.byteOffset + pos, rasterBytes),
      channels: 1,
    };
  }
  const rgba = new Uint8Array(width * height * 4);
  for (let i = 0, src = pos; i < width * height; i++, src += 3) {
    rgba[i * 4] = bytes[src];
    rgba[i * 4 + 1] = bytes[src + 1];
    rgba[i * 4 + 2] = bytes[src + 2];
    rgba[i * 4 + 3] = 255;
  }
  return { width, height, pixels: rgba, channels: 4 };
}
