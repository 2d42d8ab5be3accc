import { describe, expect, it } from "vitest";

import { applyActivation, forwardSource } from "../src/forward.js";
import { conv2dToMatrix, forwardLowered, lowerModel } from "../src/lower.js";
import { Conv2dLayer, parseSourceModel, SOURCE_FORMAT } from "../src/model.js";
import { mulberry32 } from "../src/rand.js";
import { biasVec, convKernel, denseKernel, randomInputs } from "./helpers.js";

function identityKernel3x3(): number[][][][] {
  // single channel in and out, 1 at the window center
  return Array.from({ length: 3 }, (_, i) =>
    Array.from({ length: 3 }, (_, j) => [[i === 1 && j === 1 ? 1 : 0]]),
  );
}

describe("conv2dToMatrix", () => {
  it("matches the hand-built pattern for a 3x3 identity kernel on 4x4 input", () => {
    const layer: Conv2dLayer = {
      type: "conv2d",
      name: "ident",
      filters: 1,
      kernelSize: [3, 3],
      strides: [1, 1],
      activation: "linear",
      kernel: identityKernel3x3(),
      bias: [0],
    };
    const { weights, bias, outShape } = conv2dToMatrix(layer, [4, 4, 1]);
    expect(outShape).toEqual([2, 2, 1]);
    expect(bias).toEqual([0, 0, 0, 0]);

    // expected: each output unit (oh, ow) reads input pixel (oh+1, ow+1)
    const expected = Array.from({ length: 4 }, () => new Array<number>(16).fill(0));
    let row = 0;
    for (let oh = 0; oh < 2; oh++) {
      for (let ow = 0; ow < 2; ow++) {
        expected[row][(oh + 1) * 4 + (ow + 1)] = 1;
        row++;
      }
    }
    expect(weights).toEqual(expected);
  });

  it("has exactly kernel_area * in_channels nonzeros per row", () => {
    const rand = mulberry32(7);
    const layer: Conv2dLayer = {
      type: "conv2d",
      name: "c",
      filters: 3,
      kernelSize: [3, 2],
      strides: [1, 1],
      activation: "linear",
      kernel: convKernel(3, 2, 2, 3, rand),
      bias: biasVec(3, rand),
    };
    const { weights } = conv2dToMatrix(layer, [5, 6, 2]);
    for (const row of weights) {
      const nonzeros = row.filter((v) => v !== 0).length;
      expect(nonzeros).toBe(3 * 2 * 2);
    }
  });

  it("agrees with the direct convolution for strided multi-channel cases", () => {
    const rand = mulberry32(11);
    const layer: Conv2dLayer = {
      type: "conv2d",
      name: "c",
      filters: 2,
      kernelSize: [3, 3],
      strides: [2, 2],
      activation: "linear",
      kernel: convKernel(3, 3, 2, 2, rand),
      bias: biasVec(2, rand),
    };
    const model = {
      inputShape: [7, 7, 2],
      layers: [layer],
    };
    const { weights, bias } = conv2dToMatrix(layer, [7, 7, 2]);
    for (const x of randomInputs(5, 7 * 7 * 2, 21)) {
      const direct = forwardSource(model, x);
      const viaMatrix = weights.map(
        (row, r) => bias[r] + row.reduce((acc, wij, i) => acc + wij * x[i], 0),
      );
      for (let i = 0; i < direct.length; i++) {
        expect(Math.abs(direct[i] - viaMatrix[i])).toBeLessThan(1e-10);
      }
    }
  });
});

describe("lowerModel", () => {
  it("folds interior linear activations into the following layer", () => {
    const rand = mulberry32(3);
    const doc = {
      format: SOURCE_FORMAT,
      input_shape: [4],
      layers: [
        { name: "a", type: "dense", activation: "linear", kernel: denseKernel(4, 5, rand), bias: biasVec(5, rand) },
        { name: "b", type: "dense", activation: "sigmoid", kernel: denseKernel(5, 3, rand), bias: biasVec(3, rand) },
        { name: "out", type: "dense", activation: "linear", kernel: denseKernel(3, 2, rand), bias: biasVec(2, rand) },
      ],
    };
    const model = parseSourceModel(doc);
    const lowered = lowerModel(model);
    expect(lowered.stages.length).toBe(2); // a+b folded, out stays
    expect(lowered.stages[0].activation).toBe("sigmoid");
    for (const x of randomInputs(10, 4, 31)) {
      const a = forwardSource(model, x);
      const b = forwardLowered(lowered, x, applyActivation);
      for (let i = 0; i < a.length; i++) expect(Math.abs(a[i] - b[i])).toBeLessThan(1e-12);
    }
  });

  it("rejects a trailing S-curve activation", () => {
    const rand = mulberry32(4);
    const doc = {
      format: SOURCE_FORMAT,
      input_shape: [3],
      layers: [
        { name: "only", type: "dense", activation: "tanh", kernel: denseKernel(3, 2, rand), bias: biasVec(2, rand) },
      ],
    };
    expect(() => lowerModel(parseSourceModel(doc))).toThrow(/linear activation/);
  });
});
