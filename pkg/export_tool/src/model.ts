/**
 * Source-model schema: a sequential stack of dense / conv2d / flatten layers
 * with Keras-style weight layouts, as dumped by a few lines of exporter code
 * in any training ecosystem (see README).
 */

export const SOURCE_FORMAT = "sequential-json-v1";

export type Activation = "sigmoid" | "tanh" | "arctan" | "linear";

export const ACTIVATIONS: readonly Activation[] = ["sigmoid", "tanh", "arctan", "linear"];

export interface DenseLayer {
  type: "dense";
  name: string;
  units: number;
  activation: Activation;
  /** kernel[in][out], Keras layout */
  kernel: number[][];
  bias: number[];
}

export interface Conv2dLayer {
  type: "conv2d";
  name: string;
  filters: number;
  kernelSize: [number, number];
  strides: [number, number];
  activation: Activation;
  /** kernel[kh][kw][cin][cout], Keras layout */
  kernel: number[][][][];
  bias: number[];
}

export interface FlattenLayer {
  type: "flatten";
  name: string;
}

export type SourceLayer = DenseLayer | Conv2dLayer | FlattenLayer;

export interface SourceModel {
  /** [h, w, c] for image inputs, [n] for flat inputs */
  inputShape: number[];
  layers: SourceLayer[];
}

export class UnsupportedModelError extends Error {}

function fail(msg: string): never {
  throw new UnsupportedModelError(msg);
}

function asActivation(raw: unknown, layerName: string): Activation {
  const act = raw === undefined || raw === null ? "linear" : raw;
  if (typeof act !== "string" || !ACTIVATIONS.includes(act as Activation)) {
    fail(`layer '${layerName}': unsupported activation ${JSON.stringify(act)}; ` +
      `supported: ${ACTIVATIONS.join(", ")}`);
  }
  return act as Activation;
}

function asPair(raw: unknown, fallback: [number, number]): [number, number] {
  if (raw === undefined) return fallback;
  if (typeof raw === "number") return [raw, raw];
  if (Array.isArray(raw) && raw.length === 2) return [Number(raw[0]), Number(raw[1])];
  fail(`expected a number or a [h, w] pair, got ${JSON.stringify(raw)}`);
}

function checkFinite(values: number[], where: string): void {
  for (const v of values) {
    if (typeof v !== "number" || !Number.isFinite(v)) {
      fail(`${where}: non-finite or non-numeric entry`);
    }
  }
}

/** Parse and validate a source model document. */
export function parseSourceModel(doc: unknown): SourceModel {
  if (typeof doc !== "object" || doc === null) fail("model document must be a JSON object");
  const raw = doc as Record<string, unknown>;
  if (raw.format !== SOURCE_FORMAT) {
    fail(`expected format '${SOURCE_FORMAT}', got ${JSON.stringify(raw.format)}`);
  }
  const inputShape = raw.input_shape;
  if (!Array.isArray(inputShape) || inputShape.length === 0 || inputShape.length > 3 ||
      inputShape.some((d) => !Number.isInteger(d) || (d as number) <= 0)) {
    fail(`input_shape must be [n] or [h, w, c], got ${JSON.stringify(inputShape)}`);
  }
  if (!Array.isArray(raw.layers) || raw.layers.length === 0) fail("layers must be a non-empty list");

  const layers: SourceLayer[] = [];
  (raw.layers as unknown[]).forEach((entry, idx) => {
    if (typeof entry !== "object" || entry === null) fail(`layer ${idx}: not an object`);
    const layer = entry as Record<string, unknown>;
    const name = typeof layer.name === "string" ? layer.name : `layer_${idx}`;
    switch (layer.type) {
      case "dense": {
        const kernel = layer.kernel as number[][];
        const bias = layer.bias as number[];
        if (!Array.isArray(kernel) || !Array.isArray(kernel[0])) {
          fail(`layer '${name}': dense kernel must be a 2-d array [in][out]`);
        }
        const units = kernel[0].length;
        if (!Array.isArray(bias) || bias.length !== units) {
          fail(`layer '${name}': bias length ${bias?.length} does not match units ${units}`);
        }
        kernel.forEach((row, r) => {
          if (row.length !== units) fail(`layer '${name}': ragged kernel at row ${r}`);
          checkFinite(row, `layer '${name}' kernel`);
        });
        checkFinite(bias, `layer '${name}' bias`);
        layers.push({ type: "dense", name, units, activation: asActivation(layer.activation, name), kernel, bias });
        break;
      }
      case "conv2d": {
        const kernel = layer.kernel as number[][][][];
        const bias = layer.bias as number[];
        if (!Array.isArray(kernel) || !Array.isArray(kernel[0]) ||
            !Array.isArray(kernel[0][0]) || !Array.isArray(kernel[0][0][0])) {
          fail(`layer '${name}': conv2d kernel must be a 4-d array [kh][kw][cin][cout]`);
        }
        const kh = kernel.length;
        const kw = kernel[0].length;
        const cin = kernel[0][0].length;
        const cout = kernel[0][0][0].length;
        for (const plane of kernel) {
          if (plane.length !== kw) fail(`layer '${name}': ragged kernel`);
          for (const row of plane) {
            if (row.length !== cin) fail(`layer '${name}': ragged kernel`);
            for (const cell of row) {
              if (cell.length !== cout) fail(`layer '${name}': ragged kernel`);
              checkFinite(cell, `layer '${name}' kernel`);
            }
          }
        }
        if (!Array.isArray(bias) || bias.length !== cout) {
          fail(`layer '${name}': bias length ${bias?.length} does not match filters ${cout}`);
        }
        checkFinite(bias, `layer '${name}' bias`);
        const kernelSize = asPair(layer.kernel_size, [kh, kw]);
        if (kernelSize[0] !== kh || kernelSize[1] !== kw) {
          fail(`layer '${name}': kernel_size ${JSON.stringify(kernelSize)} does not match kernel array ${kh}x${kw}`);
        }
        const padding = layer.padding ?? "valid";
        if (padding !== "valid") {
          fail(`layer '${name}': unsupported padding '${String(padding)}'; only 'valid' is supported`);
        }
        layers.push({
          type: "conv2d",
          name,
          filters: cout,
          kernelSize,
          strides: asPair(layer.strides, [1, 1]),
          activation: asActivation(layer.activation, name),
          kernel,
          bias,
        });
        break;
      }
      case "flatten":
        layers.push({ type: "flatten", name });
        break;
      default:
        fail(`layer '${name}': unsupported layer type '${String(layer.type)}'`);
    }
  });
  return { inputShape: inputShape as number[], layers };
}
