/**
 * Binary descriptor dataset format.
 *
 * Layout (all integers little-endian):
 *   magic "MILD" | u32 version=1 | u32 descriptor_bytes=32 | u32 n_images
 *   then per image: u32 n_features | n_features x 32 descriptor bytes
 *
 * Descriptors are opaque 256-bit strings; byte j of a descriptor as
 * produced by the feature extractor is stored verbatim at offset j.
 */

import * as fs from "node:fs";

export const MAGIC = "MILD";
export const FORMAT_VERSION = 1;
export const DESCRIPTOR_BYTES = 32;

const HEADER_BYTES = 16;

export class DatasetFormatError extends Error {
  /** Byte offset of the defect within the file. */
  readonly offset: number;

  constructor(message: string, offset: number) {
    super(message);
    this.name = "DatasetFormatError";
    this.offset = offset;
  }
}

/**
 * One image's descriptors: a concatenation of 32-byte strings.
 * An empty Uint8Array is a legal zero-feature image.
 */
export type ImageDescriptors = Uint8Array;

export function descriptorCount(image: ImageDescriptors): number {
  if (image.length % DESCRIPTOR_BYTES !== 0) {
    throw new Error(
      `descriptor block length ${image.length} is not a multiple of ` +
      `${DESCRIPTOR_BYTES}`);
  }
  return image.length / DESCRIPTOR_BYTES;
}

export function encodeDataset(images: readonly ImageDescriptors[]): Buffer {
  let total = HEADER_BYTES;
  for (const image of images) {
    descriptorCount(image); // validates alignment
    total += 4 + image.length;
  }
  const out = Buffer.alloc(total);
  out.write(MAGIC, 0, "ascii");
  out.writeUInt32LE(FORMAT_VERSION, 4);
  out.writeUInt32LE(DESCRIPTOR_BYTES, 8);
  out.writeUInt32LE(images.length, 12);
  let offset = HEADER_BYTES;
  for (const image of images) {
    out.writeUInt32LE(descriptorCount(image), offset);
    offset += 4;
    out.set(image, offset);
    offset += image.length;
  }
  return out;
}

/** Strict parse; rejects any structural defect with its byte offset. */
export function decodeDataset(data: Buffer): ImageDescriptors[] {
  if (data.length < HEADER_BYTES) {
    throw new DatasetFormatError(
      `truncated header: need ${HEADER_BYTES} bytes, file has ${data.length}`,
      data.length);
  }
  const magic = data.toString("ascii", 0, 4);
  if (magic !== MAGIC) {
    throw new DatasetFormatError(
      `bad magic ${JSON.stringify(magic)}: expected ${JSON.stringify(MAGIC)}`,
      0);
  }
  const version = data.readUInt32LE(4);
  if (version !== FORMAT_VERSION) {
    throw new DatasetFormatError(
      `unsupported format version ${version}: expected ${FORMAT_VERSION}`, 4);
  }
  const descBytes = data.readUInt32LE(8);
  if (descBytes !== DESCRIPTOR_BYTES) {
    throw new DatasetFormatError(
      `unsupported descriptor size ${descBytes}: expected ` +
      `${DESCRIPTOR_BYTES}`, 8);
  }
  const nImages = data.readUInt32LE(12);

  const images: ImageDescriptors[] = [];
  let offset = HEADER_BYTES;
  for (let i = 0; i < nImages; i++) {
    if (offset + 4 > data.length) {
      throw new DatasetFormatError(
        `truncated file: missing feature count of image ${i}`, offset);
    }
    const count = data.readUInt32LE(offset);
    offset += 4;
    const payload = count * DESCRIPTOR_BYTES;
    if (offset + payload > data.length) {
      throw new DatasetFormatError(
        `truncated file: image ${i} declares ${count} descriptors ` +
        `(${payload} bytes) but only ${data.length - offset} bytes remain`,
        offset);
    }
    images.push(new Uint8Array(data.subarray(offset, offset + payload)));
    offset += payload;
  }
  if (offset !== data.length) {
    throw new DatasetFormatError(
      `trailing data: ${data.length - offset} unexpected bytes`, offset);
  }
  return images;
}

export function writeDatasetFile(
  filePath: string,
  images: readonly ImageDescriptors[],
): void {
  fs.writeFileSync(filePath, encodeDataset(images));
}

export function readDatasetFile(filePath: string): ImageDescriptors[] {
  return decodeDataset(fs.readFileSync(filePath));
}
