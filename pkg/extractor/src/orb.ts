/**
 * Feature detection and description via the OpenCV ORB implementation.
 *
 * The descriptor algorithm itself is delegated to the vision library;
 * this module only feeds it pixels and enforces the per-image budget.
 */

import { CvMat, CvNamespace, loadCv } from "./cv";
import { DESCRIPTOR_BYTES, ImageDescriptors } from "./format";
import { DecodedImage } from "./images";

/**
 * Detector settings recorded in the manifest. All values except the
 * feature budget are the library's documented defaults; none are tuned.
 */
export interface DetectorSettings {
  algorithm: "ORB";
  nfeatures: number;
  scaleFactor: number;
  nLevels: number;
  edgeThreshold: number;
  firstLevel: number;
  wtaK: number;
  scoreType: "HARRIS_SCORE";
  patchSize: number;
  fastThreshold: number;
}

export function detectorSettings(budget: number): DetectorSettings {
  return {
    algorithm: "ORB",
    nfeatures: budget,
    scaleFactor: 1.2,
    nLevels: 8,
    edgeThreshold: 31,
    firstLevel: 0,
    wtaK: 2,
    scoreType: "HARRIS_SCORE",
    patchSize: 31,
    fastThreshold: 20,
  };
}

export class FeatureExtractor {
  private constructor(
    private readonly cv: CvNamespace,
    private readonly budget: number,
  ) {}

  static async create(budget: number): Promise<FeatureExtractor> {
    if (!Number.isInteger(budget) || budget <= 0) {
      throw new Error(`feature budget must be a positive integer, got ${budget}`);
    }
    return new FeatureExtractor(await loadCv(), budget);
  }

  /**
   * Detect and describe up to `budget` features.
   *
   * The detector may return slightly more keypoints than requested; the
   * strongest `budget` responses are kept (ties broken by detection
   * order) and emitted in detection order, so output is deterministic.
   */
  extract(image: DecodedImage): ImageDescriptors {
    const cv = this.cv;
    const mats: { delete(): void }[] = [];
    try {
      let gray: CvMat;
      if (image.channels === 1) {
        gray = new cv.Mat(image.height, image.width, cv.CV_8UC1);
        mats.push(gray);
        gray.data.set(image.pixels);
      } else {
        const rgba = new cv.Mat(image.height, image.width, cv.CV_8UC4);
        mats.push(rgba);
        rgba.data.set(image.pixels);
        gray = new cv.Mat();
        mats.push(gray);
        cv.cvtColor(rgba, gray, cv.COLOR_RGBA2GRAY);
      }

      const s = detectorSettings(this.budget);
      const orb = new cv.ORB(
        s.nfeatures, s.scaleFactor, s.nLevels, s.edgeThreshold,
        s.firstLevel, s.wtaK, cv.ORB_HARRIS_SCORE, s.patchSize,
        s.fastThreshold);
      mats.push(orb);
      const keypoints = new cv.KeyPointVector();
      mats.push(keypoints);
      const descriptors = new cv.Mat();
      mats.push(descriptors);
      const noMask = new cv.Mat();
      mats.push(noMask);

      orb.detectAndCompute(gray, noMask, keypoints, descriptors);

      const n = descriptors.rows;
      if (n === 0) {
        return new Uint8Array(0);
      }
      if (descriptors.cols !== DESCRIPTOR_BYTES) {
        throw new Error(
          `descriptor width ${descriptors.cols} != ${DESCRIPTOR_BYTES}`);
      }
      if (n <= this.budget) {
        return new Uint8Array(descriptors.data.subarray(0, n * DESCRIPTOR_BYTES));
      }

      const responses = new Float64Array(n);
      for (let i = 0; i < n; i++) {
        responses[i] = keypoints.get(i).response;
      }
      const order = Array.from({ length: n }, (_, i) => i);
      order.sort((a, b) => responses[b] - responses[a] || a - b);
      const kept = order.slice(0, this.budget).sort((a, b) => a - b);

      const out = new Uint8Array(this.budget * DESCRIPTOR_BYTES);
      for (let i = 0; i < kept.length; i++) {
        const src = kept[i] * DESCRIPTOR_BYTES;
        out.set(
          descriptors.data.subarray(src, src + DESCRIPTOR_BYTES),
          i * DESCRIPTOR_BYTES);
      }
      return out;
    } finally {
      for (const m of mats) m.delete();
    }
  }
}
