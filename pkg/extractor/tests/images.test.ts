import * as fs from "node:fs";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { decodeImageFile, isImageFilename } from "../src/images";
import {
  byteStream,
  noiseRgba,
  writeNoiseJpeg,
  writeNoisePng,
  writePgm,
  writePpm,
} from "./helpers";

let dir: string;

beforeAll(() => {
  dir = fs.mkdtempSync(path.join(require("node:os").tmpdir(), "images-"));
});

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

describe("isImageFilename", () => {
  it("accepts the supported extensions case-insensitively", () => {
    for (const name of ["a.png", "b.JPG", "c.jpeg", "d.PGM", "e.ppm"]) {
      expect(isImageFilename(name), name).toBe(true);
    }
  });

  it("rejects other files", () => {
    for (const name of ["a.bmp", "b.txt", "noext", "d.png.json"]) {
      expect(isImageFilename(name), name).toBe(false);
    }
  });
});

describe("decodeImageFile", () => {
  it("round-trips PNG pixels exactly", () => {
    const p = path.join(dir, "noise.png");
    writeNoisePng(p, 20, 12, 5);
    const img = decodeImageFile(p);
    expect(img.width).toBe(20);
    expect(img.height).toBe(12);
    expect(img.channels).toBe(4);
    expect(Buffer.from(img.pixels).equals(noiseRgba(20, 12, 5))).toBe(true);
  });

  it("decodes JPEG dimensions (content is lossy)", () => {
    const p = path.join(dir, "noise.jpg");
    writeNoiseJpeg(p, 24, 16, 9);
    const img = decodeImageFile(p);
    expect(img.width).toBe(24);
    expect(img.height).toBe(16);
    expect(img.channels).toBe(4);
    expect(img.pixels.length).toBe(24 * 16 * 4);
  });

  it("round-trips binary PGM exactly as grayscale", () => {
    const next = byteStream(11);
    const gray = Uint8Array.from({ length: 15 * 7 }, () => next());
    const p = path.join(dir, "img.pgm");
    writePgm(p, 15, 7, gray);
    const img = decodeImageFile(p);
    expect(img.channels).toBe(1);
    expect(img.width).toBe(15);
    expect(img.height).toBe(7);
    expect(Buffer.from(img.pixels).equals(Buffer.from(gray))).toBe(true);
  });

  it("expands binary PPM to RGBA with opaque alpha", () => {
    const next = byteStream(13);
    const rgb = Uint8Array.from({ length: 4 * 3 * 3 }, () => next());
    const p = path.join(dir, "img.ppm");
    writePpm(p, 4, 3, rgb);
    const img = decodeImageFile(p);
    expect(img.channels).toBe(4);
    for (let i = 0; i < 4 * 3; i++) {
      expect(img.pixels[i * 4]).toBe(rgb[i * 3]);
      expect(img.pixels[i * 4 + 1]).toBe(rgb[i * 3 + 1]);
      expect(img.pixels[i * 4 + 2]).toBe(rgb[i * 3 + 2]);
      expect(img.pixels[i * 4 + 3]).toBe(255);
    }
  });

  it("tolerates comments inside the PNM header", () => {
    const gray = Uint8Array.from({ length: 6 }, (_, i) => i * 10);
    const p = path.join(dir, "comment.pgm");
    writePgm(p, 3, 2, gray, "# camera 0\n# exposure 8ms\n");
    const img = decodeImageFile(p);
    expect(img.width).toBe(3);
    expect(img.height).toBe(2);
    expect(Buffer.from(img.pixels).equals(Buffer.from(gray))).toBe(true);
  });

  it("rejects 16-bit PNM samples", () => {
    const p = path.join(dir, "deep.pgm");
    fs.writeFileSync(p, Buffer.concat([
      Buffer.from("P5\n4 4\n65535\n", "ascii"),
      Buffer.alloc(32),
    ]));
    expect(() => decodeImageFile(p)).toThrow(/maxval 65535/);
  });

  it("rejects ASCII PNM variants", () => {
    const p = path.join(dir, "ascii.pgm");
    fs.writeFileSync(p, "P2\n2 2\n255\n0 1 2 3\n");
    expect(() => decodeImageFile(p)).toThrow(/magic "P2"/);
  });

  it("rejects a truncated PNM raster with byte accounting", () => {
    const p = path.join(dir, "short.pgm");
    fs.writeFileSync(p, Buffer.concat([
      Buffer.from("P5\n8 8\n255\n", "ascii"),
      Buffer.alloc(10),
    ]));
    expect(() => decodeImageFile(p)).toThrow(/need 64 bytes, have 10/);
  });

  it("rejects garbage bytes behind a .png extension", () => {
    const p = path.join(dir, "garbage.png");
    fs.writeFileSync(p, Buffer.from("this is not a png at all, sorry"));
    expect(() => decodeImageFile(p)).toThrow();
  });

  it("rejects unsupported extensions by name", () => {
    const p = path.join(dir, "image.bmp");
    fs.writeFileSync(p, Buffer.alloc(64));
    expect(() => decodeImageFile(p)).toThrow(/unsupported image extension .bmp/);
  });
});
