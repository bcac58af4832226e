export {
  DESCRIPTOR_BYTES,
  FORMAT_VERSION,
  MAGIC,
  DatasetFormatError,
  decodeDataset,
  descriptorCount,
  encodeDataset,
  readDatasetFile,
  writeDatasetFile,
} from "./format";
export type { ImageDescriptors } from "./format";
export { IMAGE_EXTENSIONS, decodeImageFile, isImageFilename } from "./images";
export type { DecodedImage } from "./images";
export { FeatureExtractor, detectorSettings } from "./orb";
export type { DetectorSettings } from "./orb";
export {
  DEFAULT_FEATURE_BUDGET,
  extract,
  listImageFiles,
} from "./extract";
export type {
  ExtractionManifest,
  ExtractionResult,
  ExtractionSpec,
  ManifestImageEntry,
  ManifestSkipEntry,
} from "./extract";
