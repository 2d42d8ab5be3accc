/** Export pipeline: parse, lower, emit dualcert-net-v1 JSON, check fidelity. */

import { readFileSync, writeFileSync } from "node:fs";

import { applyActivation, forwardSource } from "./forward.js";
import { forwardLowered, lowerModel, LoweredModel } from "./lower.js";
import { parseSourceModel, SOURCE_FORMAT, SourceModel } from "./model.js";
import { mulberry32 } from "./rand.js";

export const TARGET_FORMAT = "dualcert-net-v1";

export interface ExportSummary {
  inputDim: number;
  outputDim: number;
  numLayers: number;
  maxAbsDiff: number;
  checkedInputs: number;
  sourceLayerNames: string[];
}

export function toTargetDocument(lowered: LoweredModel, sourcePath?: string): object {
  return {
    format: TARGET_FORMAT,
    input_dim: lowered.inputDim,
    layers: lowered.stages.map((stage) => ({
      type: "dense",
      weights: stage.weights,
      bias: stage.bias,
      activation: stage.activation,
    })),
    metadata: {
      source_format: SOURCE_FORMAT,
      source_layers: lowered.sourceLayerNames,
      ...(sourcePath ? { source_path: sourcePath } : {}),
    },
  };
}

/** Max abs output difference between source and lowered model on random inputs. */
export function fidelityCheck(model: SourceModel, lowered: LoweredModel, n: number, seed = 1234): number {
  const rand = mulberry32(seed);
  let worst = 0;
  for (let t = 0; t < n; t++) {
    const x = Array.from({ length: lowered.inputDim }, () => rand());
    const a = forwardSource(model, x);
    const b = forwardLowered(lowered, x, applyActivation);
    if (a.length !== b.length) {
      throw new Error(`output size mismatch: source ${a.length} vs lowered ${b.length}`);
    }
    for (let i = 0; i < a.length; i++) worst = Math.max(worst, Math.abs(a[i] - b[i]));
  }
  return worst;
}

export function exportModel(inPath: string, outPath: string, check = 10): ExportSummary {
  const doc: unknown = JSON.parse(readFileSync(inPath, "utf-8"));
  const model = parseSourceModel(doc);
  const lowered = lowerModel(model);
  const maxAbsDiff = check > 0 ? fidelityCheck(model, lowered, check) : 0;
  writeFileSync(outPath, JSON.stringify(toTargetDocument(lowered, inPath)));
  return {
    inputDim: lowered.inputDim,
    outputDim: lowered.stages[lowered.stages.length - 1].weights.length,
    numLayers: lowered.stages.length,
    maxAbsDiff,
    checkedInputs: check,
    sourceLayerNames: lowered.sourceLayerNames,
  };
}
