"""
Float32 inference kernels shared by `predict` and both inference engines.

Each output neuron accumulates its products in ascending input index order and
adds its bias last. The operations are element-wise, so a row produces the same
bits whether it is evaluated alone or inside any batch.
"""
import numpy as np


def dense(inputs: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """inputs (rows x in) . weights (out x in)^T + bias, ascending accumulation."""
    rows, fan_in = inputs.shape
    acc = np.zeros((rows, weights.shape[0]), dtype=np.float32)
    for i in range(fan_in):
        acc += inputs[:, i:i + 1] * weights[:, i]
    acc += bias
    return acc


def relu(values: np.ndarray) -> np.ndarray:
    return np.maximum(values, np.float32(0.0))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    total = exps[:, 0].copy()
    for j in range(1, exps.shape[1]):
        total += exps[:, j]
    return exps / total[:, None]


def mlp_forward(inputs: np.ndarray, weights, biases) -> np.ndarray:
    """Hidden layers with ReLU, output layer with softmax; returns per-class scores."""
    activations = inputs
    last = len(weights) - 1
    for index, (w, b) in enumerate(zip(weights, biases)):
        activations = dense(activations, w, b)
        if index < last:
            activations = relu(activations)
    return softmax(activations)
