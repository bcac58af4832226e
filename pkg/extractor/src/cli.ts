#!/usr/bin/env node
/** Command-line entry point: image folder in, descriptor dataset out. */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { DEFAULT_FEATURE_BUDGET, extract } from "./extract";

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("hashloop-extract")
    .usage("$0 <dir> --out <file> [options]")
    .command("$0 <dir>", "extract binary feature descriptors from a folder of images")
    .positional("dir", {
      describe: "directory of images (png/jpg/jpeg/pgm/ppm); " +
        "lexicographic filename order defines image ids",
      type: "string",
      demandOption: true,
    })
    .option("out", {
      describe: "output descriptor file",
      type: "string",
      demandOption: true,
    })
    .option("features", {
      describe: "per-image feature budget",
      type: "number",
      default: DEFAULT_FEATURE_BUDGET,
    })
    .option("manifest", {
      describe: "manifest path (default: <out>.manifest.json)",
      type: "string",
    })
    .strict()
    .help()
    .version(false)
    .parseAsync();

  const result = await extract(
    {
      imageDir: args.dir as string,
      featuresPerImage: args.features,
      outputPath: args.out,
      manifestPath: args.manifest,
    },
    (message) => console.error(`warning: ${message}`),
  );

  const m = result.manifest;
  console.log(
    `extracted ${m.totalFeatures} descriptors from ${m.images.length} ` +
    `images (budget ${m.featureBudget}/image)` +
    (m.skipped.length ? `, skipped ${m.skipped.length}` : ""));
  console.log(`wrote ${result.outputPath}`);
  console.log(`wrote ${result.manifestPath}`);
  return 0;
}

if (require.main === module) {
  main(hideBin(process.argv))
    .then((code) => process.exit(code))
    .catch((err) => {
      console.error(`error: ${err instanceof Error ? err.message : err}`);
      process.exit(1);
    });
}
