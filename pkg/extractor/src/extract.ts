/**
 * Folder-to-dataset extraction.
 *
 * Image files in the input directory, taken in lexicographic filename
 * order, define the dataset's image ids. Undecodable files are skipped
 * with a warning and recorded; decodable images that yield no features
 * occupy a zero-feature slot. A JSON manifest documents the id-to-file
 * mapping, the detector settings, and the library versions so a run can
 * be reproduced exactly.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import {
  DESCRIPTOR_BYTES,
  FORMAT_VERSION,
  MAGIC,
  ImageDescriptors,
  writeDatasetFile,
} from "./format";
import { isImageFilename, decodeImageFile } from "./images";
import { DetectorSettings, FeatureExtractor, detectorSettings } from "./orb";
import { opencvPackageVersion } from "./cv";

export const DEFAULT_FEATURE_BUDGET = 800;

export interface ExtractionSpec {
  /** Directory whose image files become the dataset, in sorted order. */
  imageDir: string;
  /** Per-image feature budget; must be a positive integer. */
  featuresPerImage?: number;
  /** Output path for the binary descriptor file. */
  outputPath: string;
  /** Manifest path; defaults to `<outputPath>.manifest.json`. */
  manifestPath?: string;
}

export interface ManifestImageEntry {
  id: number;
  file: string;
  features: number;
}

export interface ManifestSkipEntry {
  file: string;
  reason: string;
}

export interface ExtractionManifest {
  tool: string;
  toolVersion: string;
  format: { magic: string; version: number; descriptorBytes: number };
  imageDir: string;
  featureBudget: number;
  detector: DetectorSettings;
  versions: { node: string; opencvJs: string };
  images: ManifestImageEntry[];
  skipped: ManifestSkipEntry[];
  totalFeatures: number;
}

export interface ExtractionResult {
  outputPath: string;
  manifestPath: string;
  manifest: ExtractionManifest;
}

function toolVersion(): string {
  // eslint-disable-next-line @typescript-eslint/no-var-requires
  const pkg = require("../package.json") as { version: string };
  return pkg.version;
}

/** Image files of the directory in the order that defines image ids. */
export function listImageFiles(imageDir: string): string[] {
  const entries = fs.readdirSync(imageDir, { withFileTypes: true });
  return entries
    .filter((e) => e.isFile() && isImageFilename(e.name))
    .map((e) => e.name)
    .sort();
}

export async function extract(
  spec: ExtractionSpec,
  warn: (message: string) => void = () => {},
): Promise<ExtractionResult> {
  const budget = spec.featuresPerImage ?? DEFAULT_FEATURE_BUDGET;
  if (!Number.isInteger(budget) || budget <= 0) {
    throw new Error(`feature budget must be a positive integer, got ${budget}`);
  }
  let stat: fs.Stats;
  try {
    stat = fs.statSync(spec.imageDir);
  } catch {
    throw new Error(`image directory not found: ${spec.imageDir}`);
  }
  if (!stat.isDirectory()) {
    throw new Error(`not a directory: ${spec.imageDir}`);
  }

  const files = listImageFiles(spec.imageDir);
  if (files.length === 0) {
    throw new Error(
      `no image files (${["png", "jpg", "jpeg", "pgm", "ppm"].join("/")}) ` +
      `in ${spec.imageDir}`);
  }

  const extractor = await FeatureExtractor.create(budget);
  const images: ImageDescriptors[] = [];
  const imageEntries: ManifestImageEntry[] = [];
  const skipped: ManifestSkipEntry[] = [];

  for (const file of files) {
    const filePath = path.join(spec.imageDir, file);
    let descriptors: ImageDescriptors;
    try {
      descriptors = extractor.extract(decodeImageFile(filePath));
    } catch (err) {
      const reason = err instanceof Error ? err.message : String(err);
      skipped.push({ file, reason });
      warn(`skipping ${file}: ${reason}`);
      continue;
    }
    imageEntries.push({
      id: images.length,
      file,
      features: descriptors.length / DESCRIPTOR_BYTES,
    });
    images.push(descriptors);
  }

  if (images.length === 0) {
    throw new Error(
      `no decodable images in ${spec.imageDir}: all ${files.length} ` +
      "candidates were skipped");
  }

  const manifest: ExtractionManifest = {
    tool: "hashloop-extract",
    toolVersion: toolVersion(),
    format: {
      magic: MAGIC,
      version: FORMAT_VERSION,
      descriptorBytes: DESCRIPTOR_BYTES,
    },
    imageDir: spec.imageDir,
    featureBudget: budget,
    detector: detectorSettings(budget),
    versions: { node: process.version, opencvJs: opencvPackageVersion() },
    images: imageEntries,
    skipped,
    totalFeatures: imageEntries.reduce((acc, e) => acc + e.features, 0),
  };

  const manifestPath = spec.manifestPath ?? `${spec.outputPath}.manifest.json`;
  writeDatasetFile(spec.outputPath, images);
  fs.writeFileSync(manifestPath, `${JSON.stringify(manifest, null, 2)}\n`);
  return { outputPath: spec.outputPath, manifestPath, manifest };
}
