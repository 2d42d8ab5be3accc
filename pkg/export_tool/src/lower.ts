/**
 * Lowering to the verifier's dense format.
 *
 * Every layer becomes an affine map over the flattened HWC input of that
 * layer: conv2d rows are materialized one output unit at a time, flatten is
 * the identity on the flat vector, dense transposes the Keras kernel.
 * Interior linear activations are then folded into the following affine map
 * so hidden layers always carry an S-curve, as the target format requires.
 */

import { Activation, Conv2dLayer, SourceModel, UnsupportedModelError } from "./model.js";

export interface AffineStage {
  /** weights[out][in] */
  weights: number[][];
  bias: number[];
  activation: Activation;
  name: string;
}

export interface LoweredModel {
  inputDim: number;
  stages: AffineStage[];
  sourceLayerNames: string[];
}

export function conv2dToMatrix(
  layer: Conv2dLayer,
  shape: [number, number, number],
): { weights: number[][]; bias: number[]; outShape: [number, number, number] } {
  const [h, w, c] = shape;
  const [kh, kw] = layer.kernelSize;
  const [sh, sw] = layer.strides;
  const outH = Math.floor((h - kh) / sh) + 1;
  const outW = Math.floor((w - kw) / sw) + 1;
  if (outH <= 0 || outW <= 0) {
    throw new UnsupportedModelError(
      `layer '${layer.name}': kernel ${kh}x${kw} does not fit input ${h}x${w}`,
    );
  }
  const nIn = h * w * c;
  const nOut = outH * outW * layer.filters;
  const weights: number[][] = [];
  const bias = new Array<number>(nOut);
  for (let oh = 0; oh < outH; oh++) {
    for (let ow = 0; ow < outW; ow++) {
      for (let oc = 0; oc < layer.filters; oc++) {
        const row = new Array<number>(nIn).fill(0);
        for (let i = 0; i < kh; i++) {
          for (let j = 0; j < kw; j++) {
            for (let ic = 0; ic < c; ic++) {
              row[((oh * sh + i) * w + (ow * sw + j)) * c + ic] = layer.kernel[i][j][ic][oc];
            }
          }
        }
        const r = (oh * outW + ow) * layer.filters + oc;
        weights.push(row);
        bias[r] = layer.bias[oc];
      }
    }
  }
  return { weights, bias, outShape: [outH, outW, layer.filters] };
}

function composeAffine(first: AffineStage, second: AffineStage): AffineStage {
  // second(first(x)): W2 (W1 x + b1) + b2
  const nOut = second.weights.length;
  const nMid = first.weights.length;
  const nIn = first.weights[0]?.length ?? 0;
  const weights: number[][] = [];
  const bias = new Array<number>(nOut);
  for (let r = 0; r < nOut; r++) {
    const row = new Array<number>(nIn).fill(0);
    let acc = second.bias[r];
    for (let m = 0; m < nMid; m++) {
      const w2 = second.weights[r][m];
      if (w2 === 0) continue;
      acc += w2 * first.bias[m];
      const w1row = first.weights[m];
      for (let i = 0; i < nIn; i++) row[i] += w2 * w1row[i];
    }
    weights.push(row);
    bias[r] = acc;
  }
  return { weights, bias, activation: second.activation, name: `${first.name}+${second.name}` };
}

export function lowerModel(model: SourceModel): LoweredModel {
  let shape = model.inputShape.slice();
  const inputDim = shape.reduce((a, b) => a * b, 1);
  const stages: AffineStage[] = [];

  for (const layer of model.layers) {
    if (layer.type === "flatten") {
      shape = [shape.reduce((a, b) => a * b, 1)];
      continue;
    }
    if (layer.type === "dense") {
      const flat = shape.reduce((a, b) => a * b, 1);
      if (layer.kernel.length !== flat) {
        throw new UnsupportedModelError(
          `layer '${layer.name}': expects ${layer.kernel.length} inputs but receives ${flat}`,
        );
      }
      const weights: number[][] = [];
      for (let j = 0; j < layer.units; j++) {
        const row = new Array<number>(flat);
        for (let i = 0; i < flat; i++) row[i] = layer.kernel[i][j];
        weights.push(row);
      }
      stages.push({ weights, bias: layer.bias.slice(), activation: layer.activation, name: layer.name });
      shape = [layer.units];
      continue;
    }
    if (shape.length !== 3) {
      throw new UnsupportedModelError(
        `layer '${layer.name}': conv2d needs a [h, w, c] input, have shape [${shape}]`,
      );
    }
    const { weights, bias, outShape } = conv2dToMatrix(layer, shape as [number, number, number]);
    stages.push({ weights, bias, activation: layer.activation, name: layer.name });
    shape = outShape;
  }

  if (stages.length === 0) {
    throw new UnsupportedModelError("model has no affine layers");
  }
  if (stages[stages.length - 1].activation !== "linear") {
    throw new UnsupportedModelError(
      `final layer '${stages[stages.length - 1].name}' must have a linear activation ` +
      "to be representable in dualcert-net-v1",
    );
  }

  // fold interior linear activations into the following affine map
  const folded: AffineStage[] = [];
  for (const stage of stages) {
    const prev = folded[folded.length - 1];
    if (prev && prev.activation === "linear") {
      folded[folded.length - 1] = composeAffine(prev, stage);
    } else {
      folded.push(stage);
    }
  }
  return { inputDim, stages: folded, sourceLayerNames: model.layers.map((l) => l.name) };
}

export function forwardLowered(lowered: LoweredModel, input: number[], applyAct: (a: Activation, x: number) => number): number[] {
  let values = input;
  for (const stage of lowered.stages) {
    const out = new Array<number>(stage.weights.length);
    for (let r = 0; r < stage.weights.length; r++) {
      let acc = stage.bias[r];
      const row = stage.weights[r];
      for (let i = 0; i < row.length; i++) acc += row[i] * values[i];
      out[r] = stage.activation === "linear" ? acc : applyAct(stage.activation, acc);
    }
    values = out;
  }
  return values;
}
