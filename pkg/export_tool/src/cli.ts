#!/usr/bin/env node
/**
 * dualcert-export [export] --in model.json --out net.json [--check N]
 *
 * Exit codes: 0 success, 1 usage or unsupported model, 2 fidelity check failure.
 */

import { parseArgs } from "node:util";

import { exportModel } from "./export.js";
import { UnsupportedModelError } from "./model.js";

const FIDELITY_TOL = 1e-5;

export function main(argv: string[]): number {
  const args = argv[0] === "export" ? argv.slice(1) : argv;
  let parsed;
  try {
    parsed = parseArgs({
      args,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        check: { type: "string", default: "10" },
      },
      allowPositionals: false,
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  const { in: inPath, out: outPath, check } = parsed.values;
  if (!inPath || !outPath) {
    console.error("usage: dualcert-export --in model.json --out net.json [--check N]");
    return 1;
  }
  const n = Number(check);
  if (!Number.isInteger(n) || n < 0) {
    console.error(`error: --check must be a non-negative integer, got '${check}'`);
    return 1;
  }

  try {
    const summary = exportModel(inPath, outPath, n);
    console.log(
      `exported ${summary.numLayers} dense layers ` +
      `(${summary.inputDim} -> ${summary.outputDim}) to ${outPath}`,
    );
    if (n > 0) {
      console.log(
        `fidelity: max |source - lowered| = ${summary.maxAbsDiff.toExponential(3)} ` +
        `over ${summary.checkedInputs} random inputs`,
      );
      if (summary.maxAbsDiff > FIDELITY_TOL) {
        console.error(`error: fidelity check failed (tolerance ${FIDELITY_TOL})`);
        return 2;
      }
    }
    return 0;
  } catch (err) {
    if (err instanceof UnsupportedModelError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
