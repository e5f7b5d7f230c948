"""Writes the tiny ONNX models used by the network backend tests.

Each model pools its input to per-channel means, then a Gemm with fixed
weights produces the head. Weights are stored transposed (transB=1): OpenCV
4.5's importer misreads the output width of a non-square untransposed Gemm. Run from this directory: python3 make_models.py
"""
import numpy as np
import onnx
from onnx import TensorProto, helper, numpy_helper


def pooled_gemm(name, in_shape, weight, bias, out_shape):
    x = helper.make_tensor_value_info("input", TensorProto.FLOAT, in_shape)
    y = helper.make_tensor_value_info("output", TensorProto.FLOAT, out_shape)
    inits = [
        numpy_helper.from_array(weight.T.astype(np.float32), "W"),
        numpy_helper.from_array(bias.astype(np.float32), "B"),
        numpy_helper.from_array(np.array(out_shape, dtype=np.int64), "shape"),
        numpy_helper.from_array(np.array(in_shape, dtype=np.int64), "in_shape"),
    ]
    nodes = [
        # Pins the input size: any other canvas fails to reshape.
        helper.make_node("Reshape", ["input", "in_shape"], ["pinned"]),
        helper.make_node("GlobalAveragePool", ["pinned"], ["pooled"]),
        helper.make_node("Flatten", ["pooled"], ["flat"], axis=1),
        helper.make_node("Gemm", ["flat", "W", "B"], ["head"], transB=1),
        helper.make_node("Reshape", ["head", "shape"], ["output"]),
    ]
    graph = helper.make_graph(nodes, name, [x], [y], inits)
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 11)])
    model.ir_version = 7
    onnx.checker.check_model(model)
    onnx.save(model, name + ".onnx")


# Detector rows in canvas pixels: cx, cy, w, h, objectness, p_whole, p_upper, p_part.
rows = np.array([
    [32, 32, 20, 40, 0.9, 0.9, 0.05, 0.05],   # whole body
    [32, 33, 20, 40, 0.5, 0.9, 0.05, 0.05],   # duplicate, suppressed by NMS
    [10, 10, 8, 8, 0.8, 0.1, 0.8, 0.1],       # upper body, partly in the padding
    [32, 3, 10, 4, 0.9, 0.1, 0.1, 0.8],       # entirely in the padding
    [50, 50, 6, 6, 0.1, 0.5, 0.3, 0.2],       # below the score threshold
], dtype=np.float32)
pooled_gemm("detector_64", [1, 3, 64, 64], np.zeros((3, rows.size)), rows.reshape(-1), [1, len(rows), 8])

wide = np.zeros((2, 85), dtype=np.float32)
pooled_gemm("detector_85col", [1, 3, 64, 64], np.zeros((3, wide.size)), wide.reshape(-1), [1, 2, 85])

# Classifier logits follow the mean red, green and blue of the crop.
pooled_gemm("classifier_3", [1, 3, 384, 128], 10.0 * np.eye(3), np.zeros(3), [1, 3])
pooled_gemm("classifier_5", [1, 3, 384, 128], np.zeros((3, 5)), np.zeros(5), [1, 5])
