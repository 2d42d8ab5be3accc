import { mulberry32 } from "../src/rand.js";

export function denseKernel(nIn: number, nOut: number, rand: () => number): number[][] {
  return Array.from({ length: nIn }, () => Array.from({ length: nOut }, () => rand() * 2 - 1));
}

export function convKernel(
  kh: number,
  kw: number,
  cin: number,
  cout: number,
  rand: () => number,
): number[][][][] {
  return Array.from({ length: kh }, () =>
    Array.from({ length: kw }, () =>
      Array.from({ length: cin }, () =>
        // keep entries away from zero so structural nonzeros stay nonzero
        Array.from({ length: cout }, () => 0.1 + 0.9 * rand()),
      ),
    ),
  );
}

export function biasVec(n: number, rand: () => number): number[] {
  return Array.from({ length: n }, () => rand() - 0.5);
}

export function randomInputs(n: number, dim: number, seed: number): number[][] {
  const rand = mulberry32(seed);
  return Array.from({ length: n }, () => Array.from({ length: dim }, () => rand()));
}

import { SOURCE_FORMAT } from "../src/model.js";

export function denseSigmoidModelDoc(seed = 5) {
  const rand = mulberry32(seed);
  return {
    format: SOURCE_FORMAT,
    input_shape: [6],
    layers: [
      { name: "fc1", type: "dense", activation: "sigmoid", kernel: denseKernel(6, 8, rand), bias: biasVec(8, rand) },
      { name: "fc2", type: "dense", activation: "sigmoid", kernel: denseKernel(8, 5, rand), bias: biasVec(5, rand) },
      { name: "out", type: "dense", activation: "linear", kernel: denseKernel(5, 3, rand), bias: biasVec(3, rand) },
    ],
  };
}

export function convModelDoc(seed = 6) {
  const rand = mulberry32(seed);
  return {
    format: SOURCE_FORMAT,
    input_shape: [5, 5, 2],
    layers: [
      {
        name: "conv1", type: "conv2d", activation: "tanh", filters: 3,
        kernel_size: [3, 3], strides: [1, 1], padding: "valid",
        kernel: convKernel(3, 3, 2, 3, rand), bias: biasVec(3, rand),
      },
      { name: "flatten", type: "flatten" },
      { name: "fc", type: "dense", activation: "arctan", kernel: denseKernel(27, 6, rand), bias: biasVec(6, rand) },
      { name: "out", type: "dense", activation: "linear", kernel: denseKernel(6, 2, rand), bias: biasVec(2, rand) },
    ],
  };
}
