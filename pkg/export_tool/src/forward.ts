/** Direct evaluation of source models, the reference side of the fidelity check. */

import { Activation, SourceModel } from "./model.js";

export function applyActivation(act: Activation, x: number): number {
  switch (act) {
    case "sigmoid":
      return x >= 0 ? 1 / (1 + Math.exp(-x)) : Math.exp(x) / (1 + Math.exp(x));
    case "tanh":
      return Math.tanh(x);
    case "arctan":
      return Math.atan(x);
    case "linear":
      return x;
  }
}

/** Spatial tensors are flat arrays in HWC order: index = (h * W + w) * C + c. */
export function forwardSource(model: SourceModel, input: number[]): number[] {
  let values = input.slice();
  let shape = model.inputShape.slice();
  const size = shape.reduce((a, b) => a * b, 1);
  if (values.length !== size) {
    throw new Error(`input has ${values.length} values, expected ${size}`);
  }

  for (const layer of model.layers) {
    if (layer.type === "flatten") {
      shape = [values.length];
      continue;
    }
    if (layer.type === "dense") {
      const nIn = layer.kernel.length;
      if (values.length !== nIn) {
        throw new Error(`layer '${layer.name}': expected ${nIn} inputs, got ${values.length}`);
      }
      const out = new Array<number>(layer.units);
      for (let j = 0; j < layer.units; j++) {
        let acc = layer.bias[j];
        for (let i = 0; i < nIn; i++) acc += values[i] * layer.kernel[i][j];
        out[j] = applyActivation(layer.activation, acc);
      }
      values = out;
      shape = [layer.units];
      continue;
    }
    // conv2d
    if (shape.length !== 3) {
      throw new Error(`layer '${layer.name}': conv2d needs a [h, w, c] input, have shape [${shape}]`);
    }
    const [h, w, c] = shape;
    const [kh, kw] = layer.kernelSize;
    const [sh, sw] = layer.strides;
    const outH = Math.floor((h - kh) / sh) + 1;
    const outW = Math.floor((w - kw) / sw) + 1;
    if (outH <= 0 || outW <= 0) {
      throw new Error(`layer '${layer.name}': kernel ${kh}x${kw} does not fit input ${h}x${w}`);
    }
    const out = new Array<number>(outH * outW * layer.filters);
    for (let oh = 0; oh < outH; oh++) {
      for (let ow = 0; ow < outW; ow++) {
        for (let oc = 0; oc < layer.filters; oc++) {
          let acc = layer.bias[oc];
          for (let i = 0; i < kh; i++) {
            for (let j = 0; j < kw; j++) {
              for (let ic = 0; ic < c; ic++) {
                const src = ((oh * sh + i) * w + (ow * sw + j)) * c + ic;
                acc += values[src] * layer.kernel[i][j][ic][oc];
              }
            }
          }
          out[(oh * outW + ow) * layer.filters + oc] = applyActivation(layer.activation, acc);
        }
      }
    }
    values = out;
    shape = [outH, outW, layer.filters];
  }
  return values;
}
