/**
 * Narrow, structural view of the OpenCV WASM binding.
 *
 * The binding's own type declarations describe the browser build; the parts
 * used here are typed structurally so the compiler checks exactly what we
 * call and nothing else.
 */

export interface CvMat {
  readonly rows: number;
  readonly cols: number;
  /** Row-major view into the WASM heap; invalid after delete(). */
  readonly data: Uint8Array;
  empty(): boolean;
  delete(): void;
}

export interface CvKeyPoint {
  pt: { x: number; y: number };
  response: number;
  octave: number;
  angle: number;
  size: number;
}

export interface CvKeyPointVector {
  size(): number;
  get(index: number): CvKeyPoint;
  delete(): void;
}

export interface CvOrb {
  detectAndCompute(
    image: CvMat,
    mask: CvMat,
    keypoints: CvKeyPointVector,
    descriptors: CvMat,
  ): void;
  delete(): void;
}

export interface CvNamespace {
  Mat: {
    new (): CvMat;
    new (rows: number, cols: number, type: number): CvMat;
  };
  KeyPointVector: new () => CvKeyPointVector;
  ORB: new (
    nfeatures: number,
    scaleFactor: number,
    nlevels: number,
    edgeThreshold: number,
    firstLevel: number,
    wtaK: number,
    scoreType: number,
    patchSize: number,
    fastThreshold: number,
  ) => CvOrb;
  cvtColor(src: CvMat, dst: CvMat, code: number): void;
  CV_8UC1: number;
  CV_8UC4: number;
  COLOR_RGBA2GRAY: number;
  ORB_HARRIS_SCORE: number;
}

let cvPromise: Promise<CvNamespace> | undefined;

/**
 * Load the OpenCV WASM runtime once per process.
 *
 * The package's module export is a thenable that resolves to the cv
 * namespace when the runtime has finished initializing.
 */
export function loadCv(): Promise<CvNamespace> {
  if (cvPromise === undefined) {
    // eslint-disable-next-line @typescript-eslint/no-var-requires
    const moduleExport = require("@techstark/opencv-js") as PromiseLike<unknown>;
    cvPromise = Promise.resolve(moduleExport) as Promise<CvNamespace>;
  }
  return cvPromise;
}

/** Version string of the bundled OpenCV build, for the manifest. */
export function opencvPackageVersion(): string {
  // eslint-disable-next-line @typescript-eslint/no-var-requires
  const pkg = require("@techstark/opencv-js/package.json") as { version: string };
  return pkg.version;
}
